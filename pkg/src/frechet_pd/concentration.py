"""Spread of sample Frechet means of random-field persistence diagrams.

For each sample size ``s`` the diagrams are split into ``groups`` disjoint
samples of ``s`` diagrams.  Each sample gets its Frechet mean, and the reported
variance is the Frechet function of those means evaluated at their own mean.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cubical import sublevel_persistence
from .diagram import PersistenceDiagram
from .fields import FieldConfig, generate_field
from .frechet import compute_mean


def _field_diagrams(args) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    config, k = args
    f = generate_field(config, index=k)
    return sublevel_persistence(f, 0), sublevel_persistence(f, 1)


def simulate_diagrams(
    config: FieldConfig, num_fields: int, jobs: int = 1
) -> list[tuple[PersistenceDiagram, PersistenceDiagram]]:
    """``(H0, H1)`` diagrams of ``num_fields`` fields; field ``k`` uses stream ``(seed, k)``."""
    if num_fields < 1:
        raise ValueError(f"num_fields must be at least 1, got {num_fields}")
    tasks = [(config, k) for k in range(num_fields)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_field_diagrams, tasks, chunksize=8))
    return [_field_diagrams(t) for t in tasks]


@dataclass(frozen=True)
class SizeReport:
    sample_size: int
    variance: float
    group_means: tuple[PersistenceDiagram, ...]
    converged: bool


@dataclass(frozen=True)
class ConcentrationReport:
    sizes: tuple[SizeReport, ...]

    @property
    def variances(self) -> list[float]:
        return [s.variance for s in self.sizes]

    def inversions(self) -> int:
        """Adjacent sizes where the variance does not decrease."""
        v = self.variances
        return sum(1 for a, b in zip(v, v[1:]) if b >= a)


def _group_mean(args):
    members, seed, max_iter = args
    return compute_mean(members, init="random_input", seed=seed, max_iter=max_iter, certify=False)


def concentration_from_diagrams(
    diagrams: Sequence[PersistenceDiagram],
    sample_sizes: Sequence[int],
    groups: int,
    seed: int = 0,
    max_iter: int = 200,
    jobs: int = 1,
) -> ConcentrationReport:
    sizes = [int(s) for s in sample_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("sample sizes must be positive")
    if groups < 1:
        raise ValueError(f"groups must be at least 1, got {groups}")
    if max(sizes) * groups > len(diagrams):
        raise ValueError(
            f"max sample size {max(sizes)} x {groups} groups needs {max(sizes) * groups} "
            f"diagrams, only {len(diagrams)} available"
        )
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    perm = rng.permutation(len(diagrams))
    tasks = []
    for si, s in enumerate(sizes):
        for g in range(groups):
            members = [diagrams[int(i)] for i in perm[g * s:(g + 1) * s]]
            tasks.append((members, [seed, si, g], max_iter))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_group_mean, tasks))
    else:
        results = [_group_mean(t) for t in tasks]
    out = []
    for si, s in enumerate(sizes):
        part = results[si * groups:(si + 1) * groups]
        means = [r.mean for r in part]
        outer = compute_mean(means, init="random_input", seed=[seed, si, groups], max_iter=max_iter, certify=False)
        out.append(
            SizeReport(s, outer.frechet_value, tuple(means), outer.converged and all(r.converged for r in part))
        )
    return ConcentrationReport(tuple(out))


def concentration_experiment(
    config: FieldConfig,
    num_fields: int,
    sample_sizes: Sequence[int],
    groups: int,
    dimension: int,
    seed: int = 0,
    jobs: int = 1,
    max_iter: int = 200,
) -> ConcentrationReport:
    """Simulate ``num_fields`` fields and run :func:`concentration_from_diagrams`."""
    if dimension not in (0, 1):
        raise ValueError(f"dimension must be 0 or 1, got {dimension!r}")
    if max(sample_sizes) * groups > num_fields:
        raise ValueError(
            f"max sample size {max(sample_sizes)} x {groups} groups exceeds {num_fields} fields"
        )
    pairs = simulate_diagrams(config, num_fields, jobs)
    return concentration_from_diagrams(
        [p[dimension] for p in pairs], sample_sizes, groups, seed, max_iter, jobs
    )
