"""Stationary Gaussian random fields on a grid over the unit square.

Covariance between vertices ``p`` and ``q`` is ``exp(-alpha * |p - q|^2)``
plus ``jitter`` on the diagonal.  Samples are ``L @ z`` with ``L`` a dense
factor of the covariance, so the grid is limited to ``MAX_VERTICES`` vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cholesky, eigh, LinAlgError

from .errors import CapacityError

MAX_VERTICES = 10**4
DEFAULT_JITTER = 1e-10


@dataclass(frozen=True)
class FieldConfig:
    grid_size: int
    alpha: float
    seed: int = 0
    jitter: float = DEFAULT_JITTER

    def __post_init__(self):
        if int(self.grid_size) != self.grid_size or self.grid_size < 2:
            raise ValueError(f"grid_size must be an integer >= 2, got {self.grid_size!r}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.jitter >= 0:
            raise ValueError(f"jitter must be non-negative, got {self.jitter!r}")


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise ValueError(f"expected a square grid of side >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid_size(self) -> int:
        return self.values.shape[0]


def vertex_positions(grid_size: int) -> np.ndarray:
    """``(g*g, 2)`` positions, row-major, vertex ``(i, j)`` at ``(i, j) / (g - 1)``."""
    t = np.arange(grid_size) / (grid_size - 1)
    ii, jj = np.meshgrid(t, t, indexing="ij")
    return np.column_stack([ii.ravel(), jj.ravel()])


def covariance(grid_size: int, alpha: float, jitter: float = 0.0) -> np.ndarray:
    p = vertex_positions(grid_size)
    sq = ((p[:, None, :] - p[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-alpha * sq) + jitter * np.eye(len(p))


@lru_cache(maxsize=8)
def _factor(grid_size: int, alpha: float, jitter: float) -> np.ndarray:
    C = covariance(grid_size, alpha, jitter)
    try:
        return cholesky(C, lower=True)
    except LinAlgError:
        # numerically indefinite: use the clipped spectral square root
        vals, vecs = eigh(C)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def generate_field(config: FieldConfig, index: int | None = None) -> ScalarField:
    """Draw one field.  ``index`` selects an independent stream for the same seed."""
    g = config.grid_size
    if g * g > MAX_VERTICES:
        raise CapacityError(
            f"grid of {g}x{g} = {g * g} vertices exceeds the dense factorization bound of {MAX_VERTICES}"
        )
    L = _factor(g, float(config.alpha), float(config.jitter))
    entropy = [config.seed] if index is None else [config.seed, index]
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    z = rng.standard_normal(g * g)
    return ScalarField((L @ z).reshape(g, g))
