"""Frechet means of finitely many persistence diagrams.

:func:`compute_mean` is the greedy pairing/averaging descent: pair the current
estimate optimally with every input, move each estimate point to the
(diagonal-aware) arithmetic mean of its partners, spawn a point for every input
point left on the diagonal, and repeat until the estimate is a fixed point.
A fixed point with unique optimal pairings is a local minimum; the result
carries a certificate stating what was verified.

:func:`oracle_global_mean` is the exhaustive alternative over groupings of
input points and is only usable on tiny instances.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .assignment import DIAG, Pairing, count_optimal_pairings, distance, match_arrays
from .diagram import DIAGONAL, DiagramPoint, PersistenceDiagram, project_array
from .errors import CapacityError
from .geometry import Geodesic, supporting_vector_arrays

CERTIFICATE_TOL = 1e-9
# exhaustive uniqueness check is attempted up to this many combined points
CERTIFICATE_MAX_POINTS = 20
DEDUP_TOL = 1e-7
ORACLE_MAX_GROUPINGS = 10**5
ORACLE_MAX_PARTITIONS = 2 * 10**6

Init = Union[str, PersistenceDiagram]


@dataclass(frozen=True)
class Certificate:
    """What is known about local minimality of a returned mean.

    ``pairings_unique`` is ``None`` when the instance was too large for the
    exhaustive uniqueness check.
    """

    supporting_vector_norm: float
    pairings_unique: bool | None
    means_consistent: bool

    @property
    def holds(self) -> bool:
        return (
            self.supporting_vector_norm <= CERTIFICATE_TOL
            and self.means_consistent
            and self.pairings_unique is not False
        )

    @property
    def verified(self) -> bool:
        return self.holds and self.pairings_unique is True


@dataclass(frozen=True)
class FrechetResult:
    mean: PersistenceDiagram
    frechet_value: float
    iterations: int
    trace: tuple[float, ...]
    pairings: tuple[Pairing, ...]
    certificate: Certificate
    converged: bool


def _weights(diagrams: Sequence[PersistenceDiagram], weights) -> np.ndarray:
    if len(diagrams) == 0:
        raise ValueError("need at least one diagram")
    if weights is None:
        return np.ones(len(diagrams))
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(diagrams),):
        raise ValueError(f"expected {len(diagrams)} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be positive and finite")
    return w


def frechet_function(
    Y: PersistenceDiagram, diagrams: Sequence[PersistenceDiagram], weights=None
) -> float:
    """Weighted mean of squared distances from ``Y`` to ``diagrams``."""
    w = _weights(diagrams, weights)
    return float(math.fsum(wi * distance(X, Y) ** 2 for wi, X in zip(w, diagrams)) / w.sum())


def mean_of_matched(points: Sequence, m: int | None = None, weights=None):
    """Minimizer of ``sum_i w_i ||z - x_i||^2`` where some ``x_i`` are DIAGONAL.

    With ``k`` off-diagonal entries of mean ``w`` and diagonal projection
    ``w_D``, the result is ``(k*w + (m-k)*w_D) / m`` (weights generalize the
    counts).  All-diagonal input, or a result on the diagonal, gives DIAGONAL.
    """
    if len(points) == 0:
        raise ValueError("mean_of_matched needs at least one entry")
    if m is not None and m != len(points):
        raise ValueError(f"expected {m} entries, got {len(points)}")
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    off = [(wi, p) for wi, p in zip(w, points) if p is not DIAGONAL]
    if not off:
        return DIAGONAL
    k = math.fsum(wi for wi, _ in off)
    bar = np.sum([wi * np.asarray(tuple(p), dtype=float) for wi, p in off], axis=0) / k
    mid = 0.5 * (bar[0] + bar[1])
    out = (k * bar + (total - k) * np.array([mid, mid])) / total
    if not out[1] > out[0]:
        return DIAGONAL
    return DiagramPoint(out[0], out[1])


def _solve_all(ypts, xs_list):
    """Per-diagram ``(y_to_x, x_to_y, cost)`` between the estimate and each input."""
    return [match_arrays(ypts, xs) for xs in xs_list]


def _update(ypts: np.ndarray, xs_list, w: np.ndarray, matches):
    """One averaging step.  Returns ``(new_points, spawned, dropped)``.

    Surviving estimate points keep their order; spawned points are appended.
    """
    W = w.sum()
    K = len(ypts)
    offw = np.zeros(K)
    acc = np.zeros((K, 2))
    spawn = []
    for wi, xs, (y_to_x, x_to_y, _) in zip(w, xs_list, matches):
        hit = y_to_x != DIAG
        offw[hit] += wi
        acc[hit] += wi * xs[y_to_x[hit]]
        lone = xs[x_to_y == DIAG]
        if len(lone):
            spawn.append((wi * lone + (W - wi) * project_array(lone)) / W)
    keep = offw > 0
    bar = acc[keep] / offw[keep, None]
    moved = (offw[keep, None] * bar + (W - offw[keep, None]) * project_array(bar)) / W
    n_spawn = sum(len(s) for s in spawn)
    new = np.concatenate([moved] + spawn) if spawn else moved
    on_diag = ~(new[:, 1] > new[:, 0])
    dropped = int((~keep).sum() + on_diag.sum())
    return new[~on_diag], n_spawn, dropped


def _same_points(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    scale = max(1.0, float(np.abs(b).max()))
    return float(np.abs(a - b).max()) <= 1e-12 * scale


def _same_structure(ma, mb) -> bool:
    return all(
        np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]) for a, b in zip(ma, mb)
    )


def _initial(init: Init, diagrams, w: np.ndarray, rng: np.random.Generator) -> PersistenceDiagram:
    if isinstance(init, PersistenceDiagram):
        return init
    p = w / w.sum()
    if init == "random_input":
        return diagrams[int(rng.choice(len(diagrams), p=p))]
    if init == "midpoint":
        if len(diagrams) == 1:
            return diagrams[0]
        i, j = rng.choice(len(diagrams), size=2, replace=False, p=p)
        return Geodesic.between(diagrams[int(i)], diagrams[int(j)]).evaluate(0.5)
    raise ValueError(f"unknown init {init!r}; expected 'random_input', 'midpoint' or a diagram")


def compute_mean(
    diagrams: Sequence[PersistenceDiagram],
    init: Init = "random_input",
    seed=None,
    max_iter: int = 100,
    weights=None,
    certify: bool = True,
    certificate_max_points: int = CERTIFICATE_MAX_POINTS,
) -> FrechetResult:
    """Local minimum of the (weighted) Frechet function by greedy descent.

    ``init`` is ``"random_input"``, ``"midpoint"`` or an explicit diagram;
    ``seed`` drives the random choices.  ``weights`` make diagram ``i`` count
    ``weights[i]`` times (identical replicas always receive identical optimal
    pairings, so this equals replicating the inputs).  When ``max_iter`` runs
    out the result has ``converged=False``.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    diagrams = list(diagrams)
    w = _weights(diagrams, weights)
    W = w.sum()
    xs_list = [D.points for D in diagrams]
    rng = np.random.default_rng(seed)
    ypts = np.array(_initial(init, diagrams, w, rng).points, dtype=float)

    trace: list[float] = []
    converged = False
    iterations = 0
    matches = None
    for iterations in range(1, max_iter + 1):
        matches = _solve_all(ypts, xs_list)
        trace.append(float(math.fsum(wi * c for wi, (_, _, c) in zip(w, matches)) / W))
        new, spawned, dropped = _update(ypts, xs_list, w, matches)
        if spawned == 0 and dropped == 0 and _same_points(new, ypts):
            if not np.array_equal(new, ypts):
                again = _solve_all(new, xs_list)
                if not _same_structure(again, matches):
                    ypts = new
                    continue
                matches = again
            ypts = new
            converged = True
            break
        ypts = new
    if not converged:
        matches = _solve_all(ypts, xs_list)
    final_f = float(math.fsum(wi * c for wi, (_, _, c) in zip(w, matches)) / W)
    trace.append(final_f)

    order = np.lexsort((ypts[:, 1], ypts[:, 0])) if len(ypts) else np.empty(0, dtype=int)
    mean = PersistenceDiagram(ypts[order])
    inv = np.empty(len(order), dtype=int)
    inv[order] = np.arange(len(order))
    pairings = []
    for y_to_x, x_to_y, cost in matches:
        t2s = np.where(x_to_y == DIAG, DIAG, inv[np.maximum(x_to_y, 0)] if len(inv) else DIAG)
        pairings.append(
            Pairing(tuple(int(j) for j in y_to_x[order]), tuple(int(i) for i in t2s), float(cost))
        )
    sorted_matches = [
        (np.asarray(p.source_to_target, dtype=int), np.asarray(p.target_to_source, dtype=int))
        for p in pairings
    ]
    cert = _certificate(mean, diagrams, w, sorted_matches, certify, certificate_max_points)
    return FrechetResult(mean, final_f, iterations, tuple(trace), tuple(pairings), cert, converged)


def _certificate(mean, diagrams, w, matches, certify, max_points) -> Certificate:
    vec, _, dvecs = supporting_vector_arrays(mean.points, diagrams, w, matches)
    norm = math.sqrt(math.fsum((vec**2).ravel()) + math.fsum((dvecs**2).ravel()))
    full = [(y2x, x2y, 0.0) for y2x, x2y in matches]
    new, spawned, dropped = _update(mean.points, [D.points for D in diagrams], w, full)
    consistent = spawned == 0 and dropped == 0 and _same_points(new, mean.points)
    unique: bool | None = None
    if certify:
        unique = True
        seen: dict[PersistenceDiagram, bool] = {}
        for X in diagrams:
            if X in seen:
                continue
            if len(X) + len(mean) > max_points:
                seen[X] = True
                unique = None
                continue
            seen[X] = count_optimal_pairings(mean, X, tol=CERTIFICATE_TOL, max_points=max_points) == 1
            if not seen[X]:
                unique = False
                break
    return Certificate(norm, unique, consistent)


def local_minimum_certificate(
    Y: PersistenceDiagram,
    diagrams: Sequence[PersistenceDiagram],
    weights=None,
    max_points: int = CERTIFICATE_MAX_POINTS,
) -> Certificate:
    """Certificate for an arbitrary candidate ``Y`` (pairings solved afresh)."""
    diagrams = list(diagrams)
    w = _weights(diagrams, weights)
    matches = [m[:2] for m in _solve_all(Y.points, [D.points for D in diagrams])]
    return _certificate(Y, diagrams, w, matches, True, max_points)


def local_minima_bound(diagrams: Sequence[PersistenceDiagram]) -> int:
    """Upper bound ``prod_i (k_i + 1) ** (sum_i k_i)`` on the number of local minima."""
    ks = [len(D) for D in diagrams]
    return math.prod(k + 1 for k in ks) ** sum(ks)


@dataclass(frozen=True)
class MultiRestartResult:
    best: FrechetResult
    local_minima: tuple[FrechetResult, ...]
    results: tuple[FrechetResult, ...]

    @property
    def restarts_converged(self) -> int:
        return sum(r.converged for r in self.results)


def _restart_init(diagrams, w, ss: np.random.SeedSequence, index: int, jitter: float):
    rng = np.random.default_rng(ss)
    mode = "random_input"
    if len(diagrams) > 1 and rng.random() < 0.5:
        mode = "midpoint"
    Y0 = _initial(mode, diagrams, w, rng)
    if index == 0 or jitter <= 0 or len(Y0) == 0:
        return Y0
    # small perturbation so that solver ties are broken differently per restart
    scale = max((float(D.persistence.max()) for D in diagrams if len(D)), default=1.0)
    pts = Y0.points + rng.normal(0.0, jitter * scale, size=Y0.points.shape)
    return PersistenceDiagram.from_array(pts, drop_diagonal=True)


def _run_restart(args):
    diagrams, w, ss, index, jitter, max_iter, certify = args
    Y0 = _restart_init(diagrams, w, ss, index, jitter)
    return compute_mean(diagrams, init=Y0, max_iter=max_iter, weights=w, certify=certify)


def _rank_key(r: FrechetResult):
    return (r.frechet_value, len(r.mean), r.mean.points.tobytes())


def dedup_minima(results: Sequence[FrechetResult], tol: float = DEDUP_TOL) -> list[FrechetResult]:
    kept: list[FrechetResult] = []
    for r in sorted(results, key=_rank_key):
        if all(distance(r.mean, k.mean) >= tol for k in kept):
            kept.append(r)
    return kept


def multi_restart_mean(
    diagrams: Sequence[PersistenceDiagram],
    restarts: int = 20,
    seed=None,
    max_iter: int = 100,
    weights=None,
    jitter: float = 1e-3,
    jobs: int = 1,
    certify: bool = True,
) -> MultiRestartResult:
    """Run :func:`compute_mean` from ``restarts`` random starts.

    Starts are an input diagram or the midpoint of two inputs, chosen at random;
    every start after the first is perturbed by Gaussian noise of relative size
    ``jitter``.  Returns the lowest-variance result and the distinct converged
    local minima (duplicates within ``1e-7`` merged).
    """
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    diagrams = list(diagrams)
    w = _weights(diagrams, weights)
    seeds = np.random.SeedSequence(0 if seed is None else seed).spawn(restarts)
    tasks = [(diagrams, w, ss, r, jitter, max_iter, certify) for r, ss in enumerate(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_restart, tasks))
    else:
        results = [_run_restart(t) for t in tasks]
    converged = [r for r in results if r.converged]
    best = min(converged or results, key=_rank_key)
    minima = dedup_minima([r for r in converged if r.certificate.holds])
    return MultiRestartResult(best, tuple(minima), tuple(results))


@dataclass(frozen=True)
class OracleResult:
    mean: PersistenceDiagram
    frechet_value: float
    num_local_minima: int
    local_minima: tuple[PersistenceDiagram, ...]
    num_partitions: int


def _group_mean(members, xs_list, w, W):
    k = 0.0
    acc = np.zeros(2)
    for i, q in members:
        k += w[i]
        acc += w[i] * xs_list[i][q]
    bar = acc / k
    mid = 0.5 * (bar[0] + bar[1])
    return (k * bar + (W - k) * np.array([mid, mid])) / W


def _group_cost(members, xs_list, w, W) -> tuple[np.ndarray, float]:
    z = _group_mean(members, xs_list, w, W)
    present = {i for i, _ in members}
    cost = sum(w[i] * float(((xs_list[i][q] - z) ** 2).sum()) for i, q in members)
    diag = 0.5 * (z[1] - z[0]) ** 2
    cost += sum(w[i] for i in range(len(xs_list)) if i not in present) * diag
    return z, cost


def oracle_global_mean(
    diagrams: Sequence[PersistenceDiagram],
    weights=None,
    max_groupings: int = ORACLE_MAX_GROUPINGS,
    max_partitions: int = ORACLE_MAX_PARTITIONS,
) -> OracleResult:
    """Exhaustive global Frechet mean over all groupings of input points.

    Every partition of the input points into groups holding at most one point
    per diagram defines a candidate whose points are the group means.  The
    cheapest partition gives the global minimum; candidates passing the
    local-minimum certificate are counted.  Raises :class:`CapacityError` when
    ``prod_i (k_i + 1)`` exceeds ``max_groupings`` or the number of partitions
    exceeds ``max_partitions``.
    """
    diagrams = list(diagrams)
    w = _weights(diagrams, weights)
    W = w.sum()
    groupings = math.prod(len(D) + 1 for D in diagrams)
    if groupings > max_groupings:
        raise CapacityError(
            f"oracle needs prod(k_i + 1) = {groupings} groupings, above the bound of {max_groupings}"
        )
    xs_list = [D.points for D in diagrams]
    items = [(i, q) for i, D in enumerate(diagrams) for q in range(len(D))]
    memo: dict[tuple, tuple[np.ndarray, float]] = {}

    def cost_of(group: tuple) -> tuple[np.ndarray, float]:
        if group not in memo:
            memo[group] = _group_cost(group, xs_list, w, W)
        return memo[group]

    best_cost = math.inf
    best_groups: list[tuple] = []
    candidates: dict[bytes, np.ndarray] = {}
    count = 0
    groups: list[list[tuple[int, int]]] = []

    def rec(k: int) -> None:
        nonlocal best_cost, best_groups, count
        if k == len(items):
            count += 1
            if count > max_partitions:
                raise CapacityError(f"oracle partition count exceeds {max_partitions}")
            keys = [tuple(g) for g in groups]
            parts = [cost_of(g) for g in keys]
            total = math.fsum(c for _, c in parts) / W
            pts = np.array([z for z, _ in parts]) if parts else np.empty((0, 2))
            pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))] if len(pts) else pts
            candidates.setdefault(pts.tobytes(), pts)
            if total < best_cost:
                best_cost, best_groups = total, keys
            return
        i, q = items[k]
        for g in groups:
            if all(gi != i for gi, _ in g):
                g.append((i, q))
                rec(k + 1)
                g.pop()
        groups.append([(i, q)])
        rec(k + 1)
        groups.pop()

    rec(0)
    best_pts = np.array([cost_of(g)[0] for g in best_groups]) if best_groups else np.empty((0, 2))
    mean = PersistenceDiagram.from_array(best_pts, drop_diagonal=True)
    minima = []
    for pts in candidates.values():
        cand = PersistenceDiagram.from_array(pts, drop_diagonal=True)
        matches = [m[:2] for m in _solve_all(cand.points, xs_list)]
        full = [(a, b, 0.0) for a, b in matches]
        new, spawned, dropped = _update(cand.points, xs_list, w, full)
        if spawned or dropped or not _same_points(new, cand.points):
            continue
        if local_minimum_certificate(cand, diagrams, w, max_points=10**6).verified:
            minima.append(cand)
    distinct: list[PersistenceDiagram] = []
    for cand in sorted(minima, key=lambda D: frechet_function(D, diagrams, w)):
        if all(distance(cand, k) >= DEDUP_TOL for k in distinct):
            distinct.append(cand)
    return OracleResult(
        mean, frechet_function(mean, diagrams, w), len(distinct), tuple(distinct), count
    )
