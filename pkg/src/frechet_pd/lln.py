"""Dirac mixtures, multinomial resampling and the sample-mean concentration check.

A sample of size ``n`` from a uniform mixture of ``m`` diagrams is summarized
by its multinomial counts.  The sample mean is obtained by running the greedy
descent on the count-weighted atoms, started at a known local minimum ``Y`` of
the population Frechet function, and compared with the high-probability bound
``m^2 F(Y) / n * ln(m / delta)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import distance
from .diagram import PersistenceDiagram
from .frechet import (
    FrechetResult,
    _same_points,
    _solve_all,
    _update,
    compute_mean,
    frechet_function,
    local_minimum_certificate,
)

CLOSED_FORM_TOL = 1e-9


@dataclass(frozen=True)
class DiracMixture:
    """Uniform mixture of ``m`` atom diagrams."""

    atoms: tuple[PersistenceDiagram, ...]

    def __init__(self, atoms: Sequence[PersistenceDiagram]):
        atoms = tuple(atoms)
        if not atoms:
            raise ValueError("a mixture needs at least one atom")
        for i, a in enumerate(atoms):
            if not isinstance(a, PersistenceDiagram):
                raise TypeError(f"atom #{i} is not a PersistenceDiagram")
        object.__setattr__(self, "atoms", atoms)

    @property
    def m(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class SampleCounts:
    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def n(self) -> int:
        return sum(self.counts)


def _generator(seed) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


def sample_counts(mixture: DiracMixture, n: int, seed=None) -> SampleCounts:
    """Multinomial(n; 1/m, ..., 1/m) counts by sequential binomial draws."""
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    rng = _generator(seed)
    m = mixture.m
    left = int(n)
    out = []
    for i in range(m - 1):
        c = int(rng.binomial(left, 1.0 / (m - i))) if left else 0
        out.append(c)
        left -= c
    out.append(left)
    return SampleCounts(tuple(out))


def _support(mixture: DiracMixture, counts: SampleCounts):
    if len(counts.counts) != mixture.m:
        raise ValueError(f"expected {mixture.m} counts, got {len(counts.counts)}")
    if counts.n == 0:
        raise ValueError("all counts are zero")
    idx = [i for i, c in enumerate(counts.counts) if c > 0]
    return [mixture.atoms[i] for i in idx], np.array([counts.counts[i] for i in idx], dtype=float)


def empirical_mean_from_counts(
    mixture: DiracMixture,
    counts: SampleCounts,
    init: PersistenceDiagram,
    max_iter: int = 100,
    certify: bool = True,
) -> FrechetResult:
    """Greedy mean of the empirical measure, each atom weighted by its count."""
    atoms, w = _support(mixture, counts)
    return compute_mean(atoms, init=init, max_iter=max_iter, weights=w, certify=certify)


def closed_form_mean(mixture: DiracMixture, counts: SampleCounts, Y: PersistenceDiagram) -> np.ndarray:
    """One count-weighted averaging step from ``Y`` with ``Y``'s own pairings."""
    atoms, w = _support(mixture, counts)
    xs_list = [a.points for a in atoms]
    new, _, _ = _update(Y.points, xs_list, w, _solve_all(Y.points, xs_list))
    return new[np.lexsort((new[:, 1], new[:, 0]))] if len(new) else new


def lln_bound(m: int, frechet_value: float, n: int, delta: float) -> float:
    return m * m * frechet_value / n * math.log(m / delta)


def lln_threshold(m: int, delta: float) -> float:
    """Smallest sample size for which the bound is claimed."""
    return 8.0 * m * math.log(m / delta)


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    d_squared: float
    within_bound: bool
    certified: bool
    closed_form_agrees: bool


@dataclass(frozen=True)
class LLNReport:
    n: int
    delta: float
    bound: float
    frechet_value: float
    trials: tuple[TrialOutcome, ...]

    @property
    def coverage(self) -> float:
        return sum(t.within_bound for t in self.trials) / len(self.trials)

    @property
    def mean_d_squared(self) -> float:
        return math.fsum(t.d_squared for t in self.trials) / len(self.trials)

    @property
    def max_d_squared(self) -> float:
        return max(t.d_squared for t in self.trials)

    @property
    def certificate_failures(self) -> int:
        return sum(not t.certified for t in self.trials)

    @property
    def closed_form_mismatches(self) -> int:
        return sum(not t.closed_form_agrees for t in self.trials)


def _run_trial(args) -> TrialOutcome:
    mixture, Y, n, bound, seed, trial, certify = args
    counts = sample_counts(mixture, n, np.random.SeedSequence([seed, trial]))
    res = empirical_mean_from_counts(mixture, counts, Y, certify=certify)
    d2 = distance(Y, res.mean) ** 2
    closed = closed_form_mean(mixture, counts, Y)
    agrees = _same_points(res.mean.points, closed) or (
        closed.shape == res.mean.points.shape
        and np.abs(closed - res.mean.points).max(initial=0.0) <= CLOSED_FORM_TOL
    )
    return TrialOutcome(trial, d2, d2 <= bound, res.converged and res.certificate.holds, bool(agrees))


def lln_experiment(
    mixture: DiracMixture,
    Y: PersistenceDiagram,
    n: int,
    delta: float,
    trials: int,
    seed: int = 0,
    jobs: int = 1,
    check_precondition: bool = True,
    certify: bool = True,
) -> LLNReport:
    """Monte-Carlo coverage of the concentration bound around ``Y``.

    Trial ``k`` draws its counts from ``SeedSequence([seed, k])`` so results do
    not depend on ``jobs``.  ``check_precondition=False`` skips the sample-size
    threshold, which is useful for measuring the decay rate at small ``n``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    m = mixture.m
    if check_precondition and n < lln_threshold(m, delta):
        raise ValueError(
            f"n = {n} is below the required n >= 8 m ln(m/delta) = {lln_threshold(m, delta):.6g}"
        )
    cert = local_minimum_certificate(Y, mixture.atoms)
    if not cert.holds:
        raise ValueError(
            "Y is not a certified local minimum of the mixture's Frechet function "
            f"(supporting vector norm {cert.supporting_vector_norm:.3g}, "
            f"unique pairings {cert.pairings_unique}, consistent {cert.means_consistent})"
        )
    F = frechet_function(Y, mixture.atoms)
    bound = lln_bound(m, F, n, delta)
    tasks = [(mixture, Y, n, bound, int(seed), k, certify) for k in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, tasks, chunksize=max(1, trials // (4 * jobs))))
    else:
        outcomes = [_run_trial(t) for t in tasks]
    return LLNReport(n, delta, bound, F, tuple(outcomes))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope)
