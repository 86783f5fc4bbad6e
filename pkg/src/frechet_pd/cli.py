"""Command-line entry point ``frechet-pd``.

Exit codes: 0 success, 1 argument or input error, 2 capacity guard exceeded,
3 non-convergence.  Numbers are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .assignment import optimal_pairing
from .concentration import concentration_from_diagrams, simulate_diagrams
from .diagram import GROUND_NORMS, EUCLIDEAN
from .errors import CapacityError, NonConvergenceError
from .fields import FieldConfig
from .frechet import multi_restart_mean, oracle_global_mean
from .geometry import Geodesic, check_alexandrov
from .io import DiagramFormatError, load_diagram, save_diagram, write_diagram
from .lln import DiracMixture, lln_experiment

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _emit(header, rows, fmt_name: str, out=None) -> None:
    out = out or sys.stdout
    if fmt_name == "json":
        recs = [
            {k: (v if isinstance(v, (bool, int)) else float(fmt(v))) for k, v in zip(header, r)}
            for r in rows
        ]
        json.dump(recs if len(recs) != 1 else recs[0], out)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("FRECHET_PD_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FRECHET_PD_SEED must be an integer, got {env!r}") from None


def _positive(kind):
    def parse(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return parse


def _sizes(s: str) -> list[int]:
    try:
        out = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return out


def cmd_dist(args) -> int:
    A, B = load_diagram(args.a), load_diagram(args.b)
    p = optimal_pairing(A, B, args.ground)
    _emit(
        ["distance", "squared_distance", "num_point_matches", "num_diagonal_matches"],
        [[math.sqrt(p.cost), p.cost, p.num_point_matches, p.num_diagonal_matches]],
        args.format,
    )
    return EXIT_OK


def cmd_mean(args) -> int:
    if args.max_iter < 1:
        raise UsageError(f"--max-iter must be at least 1, got {args.max_iter}")
    diagrams = [load_diagram(p) for p in args.inputs]
    res = multi_restart_mean(
        diagrams, restarts=args.restarts, seed=_seed(args), max_iter=args.max_iter, jobs=args.jobs
    )
    best = res.best
    if args.out:
        save_diagram(best.mean, args.out)
    _emit(
        ["F", "iterations", "restarts_converged", "num_distinct_minima", "supporting_vector_norm"],
        [[best.frechet_value, best.iterations, res.restarts_converged, len(res.local_minima),
          best.certificate.supporting_vector_norm]],
        args.format,
    )
    if res.restarts_converged == 0:
        raise NonConvergenceError(f"no restart converged within {args.max_iter} iterations")
    return EXIT_OK


def cmd_oracle(args) -> int:
    diagrams = [load_diagram(p) for p in args.inputs]
    res = oracle_global_mean(diagrams)
    if args.out:
        save_diagram(res.mean, args.out)
    _emit(["F", "num_points", "num_local_minima", "num_partitions"],
          [[res.frechet_value, len(res.mean), res.num_local_minima, res.num_partitions]], args.format)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    if not 0.0 <= args.t <= 1.0:
        raise UsageError(f"--t must lie in [0, 1], got {args.t}")
    M = Geodesic.between(load_diagram(args.a), load_diagram(args.b)).evaluate(args.t)
    if args.out:
        save_diagram(M, args.out)
    else:
        sys.stdout.buffer.write(write_diagram(M, "json"))
    return EXIT_OK


def cmd_alexandrov(args) -> int:
    if not 0.0 <= args.t <= 1.0:
        raise UsageError(f"--t must lie in [0, 1], got {args.t}")
    r = check_alexandrov(load_diagram(args.a), load_diagram(args.b), load_diagram(args.c), args.t)
    _emit(["lhs", "rhs", "holds"], [[r.lhs, r.rhs, r.holds]], args.format)
    return EXIT_OK


def _diagram_files(d: Path, pattern: str = "*") -> list[Path]:
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    files = sorted(p for p in d.glob(pattern) if p.suffix.lower() in (".json", ".csv"))
    if not files:
        raise UsageError(f"no diagram files matching {pattern!r} in {d}")
    return files


def cmd_lln(args) -> int:
    atoms = [load_diagram(p) for p in _diagram_files(Path(args.mixture))]
    try:
        rep = lln_experiment(DiracMixture(atoms), load_diagram(args.y), args.n, args.delta,
                             args.trials, seed=_seed(args), jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        json.dump({
            "trials": [{"trial": t.trial, "d_squared": float(fmt(t.d_squared)),
                        "within_bound": t.within_bound} for t in rep.trials],
            "bound": float(fmt(rep.bound)),
            "coverage": float(fmt(rep.coverage)),
            "mean_d_squared": float(fmt(rep.mean_d_squared)),
            "max_d_squared": float(fmt(rep.max_d_squared)),
            "certificate_failures": rep.certificate_failures,
        }, sys.stdout)
        sys.stdout.write("\n")
        return EXIT_OK
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["trial", "d_squared", "bound", "within_bound"])
    for t in rep.trials:
        w.writerow([t.trial, fmt(t.d_squared), fmt(rep.bound), fmt(t.within_bound)])
    # summary row: mean squared distance and coverage fraction
    w.writerow(["summary", fmt(rep.mean_d_squared), fmt(rep.bound), fmt(rep.coverage)])
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = FieldConfig(args.grid, args.alpha, _seed(args), args.jitter)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, (h0, h1) in enumerate(simulate_diagrams(config, args.fields, args.jobs)):
        save_diagram(h0, out / f"field_{k:04d}_h0.json")
        save_diagram(h1, out / f"field_{k:04d}_h1.json")
    return EXIT_OK


def cmd_concentrate(args) -> int:
    files = _diagram_files(Path(args.in_dir), f"*_h{args.dim}.*")
    diagrams = [load_diagram(p) for p in files]
    try:
        rep = concentration_from_diagrams(diagrams, args.sizes, args.groups, seed=_seed(args), jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [[s.sample_size, s.variance] for s in rep.sizes]
    means = {str(s.sample_size): [m.to_list() for m in s.group_means] for s in rep.sizes}
    if args.out:
        out = Path(args.out)
        with out.open("w", newline="") as fh:
            _emit(["sample_size", "variance"], rows, args.format, fh)
        out.with_suffix(".means.json").write_text(json.dumps(means) + "\n")
    else:
        _emit(["sample_size", "variance"], rows, args.format)
    if not all(s.converged for s in rep.sizes):
        raise NonConvergenceError("a sample mean did not converge")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=_positive(int), default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=None, help="defaults to $FRECHET_PD_SEED, then 0")

    p = _Parser(prog="frechet-pd", description="Distances, geodesics and Frechet means of persistence diagrams.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("dist", parents=[common], help="L2-Wasserstein distance of two diagrams")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--ground", choices=GROUND_NORMS, default=EUCLIDEAN)
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("mean", parents=[common], help="Frechet mean by restarted greedy descent")
    s.add_argument("--in", dest="inputs", nargs="+", required=True)
    s.add_argument("--restarts", type=_positive(int), default=20)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_mean)

    s = sub.add_parser("oracle", parents=[common], help="exhaustive global Frechet mean (tiny inputs)")
    s.add_argument("--in", dest="inputs", nargs="+", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("geodesic", parents=[common], help="point on the geodesic between two diagrams")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--t", type=float, default=0.5)
    s.add_argument("--out")
    s.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("check-alexandrov", parents=[common], help="curvature comparison for a triple")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--c", required=True)
    s.add_argument("--t", type=float, default=0.5)
    s.set_defaults(func=cmd_alexandrov)

    s = sub.add_parser("lln", parents=[common], help="coverage of the sample-mean concentration bound")
    s.add_argument("--mixture", required=True, help="directory of atom diagrams")
    s.add_argument("--y", required=True)
    s.add_argument("--n", type=_positive(int), required=True)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--trials", type=_positive(int), default=1000)
    s.set_defaults(func=cmd_lln)

    s = sub.add_parser("simulate", parents=[common], help="random-field persistence diagrams")
    s.add_argument("--grid", type=int, default=32)
    s.add_argument("--alpha", type=_positive(float), default=100.0)
    s.add_argument("--fields", type=_positive(int), default=400)
    s.add_argument("--jitter", type=float, default=1e-10)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("concentrate", parents=[common], help="variance of sample means by sample size")
    s.add_argument("--in-dir", required=True)
    s.add_argument("--sizes", type=_sizes, default=[2, 8, 32])
    s.add_argument("--groups", type=_positive(int), default=10)
    s.add_argument("--dim", type=int, choices=(0, 1), default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_concentrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DiagramFormatError, FileNotFoundError, ValueError) as exc:
        print(f"frechet-pd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"frechet-pd: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NonConvergenceError as exc:
        print(f"frechet-pd: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
