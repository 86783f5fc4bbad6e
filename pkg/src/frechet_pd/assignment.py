"""Optimal matchings between persistence diagrams.

Two diagrams with ``n`` and ``m`` off-diagonal points are matched by solving a
square ``(n + m)`` assignment problem: every point may pair with a point of the
other diagram or with its own copy of the diagonal.

Layout of the cost matrix (rows = source ``X``, columns = target ``Y``)::

              Y points (m)          diagonal slots (n)
    X (n)     ||x - y||^2           ||x - D||^2  (every column)
    diag (m)  ||y - D||^2           0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diagram import (
    DIAGONAL,
    EUCLIDEAN,
    PersistenceDiagram,
    _check_ground,
    diagonal_cost_array,
)
from .errors import CapacityError

DIAG = -1  # index sentinel inside arrays

# Above this size the dense Hungarian loop in Python is slower than scipy's
# compiled shortest-augmenting-path solver.
HUNGARIAN_MAX_SIZE = 16


def solve_assignment(cost, backend: str = "auto") -> tuple[np.ndarray, float]:
    """Minimum-cost perfect matching of a square non-negative matrix.

    Returns ``(perm, total)`` where row ``i`` is assigned column ``perm[i]``.
    ``backend`` is ``"hungarian"`` (in-package Kuhn-Munkres with potentials),
    ``"scipy"`` or ``"auto"`` (Hungarian up to ``HUNGARIAN_MAX_SIZE``).
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix entries must be finite")
    if c.size and c.min() < 0:
        raise ValueError("cost matrix entries must be non-negative")
    n = c.shape[0]
    if n == 0:
        return np.empty(0, dtype=int), 0.0
    if backend == "auto":
        backend = "hungarian" if n <= HUNGARIAN_MAX_SIZE else "scipy"
    if backend == "hungarian":
        perm = _hungarian(c)
    elif backend == "scipy":
        _, perm = linear_sum_assignment(c)
        perm = np.asarray(perm, dtype=int)
    else:
        raise ValueError(f"unknown assignment backend {backend!r}")
    return perm, math.fsum(c[np.arange(n), perm])


def _hungarian(c: np.ndarray) -> np.ndarray:
    """Kuhn-Munkres via successive shortest augmenting paths with potentials.

    Rows are inserted in index order; among equally short augmenting paths the
    lowest column index is taken (``argmin`` returns the first minimum), so the
    output is deterministic under ties.
    """
    n = c.shape[0]
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = c
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j, 0 = free
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = a[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    perm = np.empty(n, dtype=int)
    perm[p[1:] - 1] = np.arange(n)
    return perm


def pair_cost_matrix(xs: np.ndarray, ys: np.ndarray, ground: str = EUCLIDEAN) -> np.ndarray:
    """Squared ground distances between two point arrays."""
    diff = xs[:, None, :] - ys[None, :, :]
    if ground == EUCLIDEAN:
        return np.einsum("ijk,ijk->ij", diff, diff)
    cheb = np.abs(diff).max(axis=2)
    return cheb * cheb


def augmented_cost_matrix(xs: np.ndarray, ys: np.ndarray, ground: str = EUCLIDEAN) -> np.ndarray:
    """Diagonal-augmented ``(n + m)`` square cost matrix."""
    n, m = len(xs), len(ys)
    c = np.zeros((n + m, n + m))
    c[:n, :m] = pair_cost_matrix(xs, ys, ground)
    c[:n, m:] = diagonal_cost_array(xs, ground)[:, None]
    c[n:, :m] = diagonal_cost_array(ys, ground)[None, :]
    return c


def match_arrays(xs: np.ndarray, ys: np.ndarray, ground: str = EUCLIDEAN, backend: str = "auto"):
    """Optimal matching between raw point arrays.

    Returns ``(x_to_y, y_to_x, cost)``; entries equal to ``DIAG`` (-1) mean the
    point is matched to the diagonal.
    """
    n, m = len(xs), len(ys)
    x_to_y = np.full(n, DIAG, dtype=int)
    y_to_x = np.full(m, DIAG, dtype=int)
    if n + m == 0:
        return x_to_y, y_to_x, 0.0
    perm, _ = solve_assignment(augmented_cost_matrix(xs, ys, ground), backend)
    rows = np.arange(n)
    hit = perm[:n] < m
    x_to_y[rows[hit]] = perm[:n][hit]
    y_to_x[perm[:n][hit]] = rows[hit]
    return x_to_y, y_to_x, matching_cost(xs, ys, x_to_y, y_to_x, ground)


def matching_cost(xs, ys, x_to_y, y_to_x, ground: str = EUCLIDEAN) -> float:
    """Sum of squared ground distances of a matching, compensated summation."""
    terms = []
    hit = x_to_y != DIAG
    if hit.any():
        d = xs[hit] - ys[x_to_y[hit]]
        if ground == EUCLIDEAN:
            terms.extend((d * d).sum(axis=1))
        else:
            terms.extend(np.abs(d).max(axis=1) ** 2)
    terms.extend(diagonal_cost_array(xs[~hit], ground))
    terms.extend(diagonal_cost_array(ys[y_to_x == DIAG], ground))
    return math.fsum(terms)


@dataclass(frozen=True)
class Pairing:
    """A bijection between the points (plus diagonal copies) of two diagrams.

    ``source_to_target[i]`` is the index in the target matched to source point
    ``i`` or ``-1`` for the diagonal; ``target_to_source`` is the inverse view.
    """

    source_to_target: tuple[int, ...]
    target_to_source: tuple[int, ...]
    cost: float
    ground: str = EUCLIDEAN

    @property
    def matches(self) -> list[tuple]:
        out = []
        for i, j in enumerate(self.source_to_target):
            out.append((i, DIAGONAL if j == DIAG else j))
        for j, i in enumerate(self.target_to_source):
            if i == DIAG:
                out.append((DIAGONAL, j))
        return out

    @property
    def num_point_matches(self) -> int:
        return sum(1 for j in self.source_to_target if j != DIAG)

    @property
    def num_diagonal_matches(self) -> int:
        return len(self.source_to_target) + len(self.target_to_source) - 2 * self.num_point_matches


def _pairing(x_to_y, y_to_x, cost, ground) -> Pairing:
    return Pairing(tuple(int(j) for j in x_to_y), tuple(int(i) for i in y_to_x), float(cost), ground)


def optimal_pairing(X: PersistenceDiagram, Y: PersistenceDiagram, ground: str = EUCLIDEAN) -> Pairing:
    _check_ground(ground)
    x_to_y, y_to_x, cost = match_arrays(X.points, Y.points, ground)
    return _pairing(x_to_y, y_to_x, cost, ground)


def distance(X: PersistenceDiagram, Y: PersistenceDiagram, ground: str = EUCLIDEAN) -> float:
    """L2-Wasserstein distance (``ground="euclidean"``) or the Chebyshev-ground
    2-Wasserstein distance (``ground="chebyshev"``)."""
    return math.sqrt(optimal_pairing(X, Y, ground).cost)


def _location_classes(pts: np.ndarray) -> np.ndarray:
    """Class id per point; identical coordinates share an id (input is sorted)."""
    cls = np.zeros(len(pts), dtype=int)
    for i in range(1, len(pts)):
        cls[i] = cls[i - 1] + (0 if np.array_equal(pts[i], pts[i - 1]) else 1)
    return cls


def optimal_pairings(
    X: PersistenceDiagram,
    Y: PersistenceDiagram,
    ground: str = EUCLIDEAN,
    tol: float = 1e-9,
    max_points: int = 12,
) -> Iterator[Pairing]:
    """Yield every geometrically distinct pairing within ``tol`` of the optimum.

    Pairings that differ only by exchanging coincident points are yielded once.
    Exhaustive branch-and-bound; raises :class:`CapacityError` when the two
    diagrams hold more than ``max_points`` off-diagonal points together.
    """
    _check_ground(ground)
    xs, ys = X.points, Y.points
    n, m = len(xs), len(ys)
    if n + m > max_points:
        raise CapacityError(
            f"exhaustive pairing enumeration is capped at {max_points} points, got {n + m}"
        )
    best = optimal_pairing(X, Y, ground).cost
    thresh = best + tol * max(1.0, best)

    pp = pair_cost_matrix(xs, ys, ground) if n and m else np.zeros((n, m))
    dx = diagonal_cost_array(xs, ground)
    dy = diagonal_cost_array(ys, ground)
    xcls = _location_classes(xs)
    ycls = _location_classes(ys)
    n_ycls = int(ycls.max()) + 1 if m else 0
    members = [np.flatnonzero(ycls == c) for c in range(n_ycls)]
    rep = np.array([mem[0] for mem in members], dtype=int)
    cap = np.array([len(mem) for mem in members], dtype=int)
    pp_c = pp[:, rep] if m else np.zeros((n, 0))
    dy_c = dy[rep] if m else np.zeros(0)
    # admissible lower bound on the cost still to be paid by x[k:]
    best_x = np.minimum(dx, pp.min(axis=1)) if m else dx.copy()
    tail_x = np.concatenate([np.cumsum(best_x[::-1])[::-1], [0.0]])

    used = np.zeros(n_ycls, dtype=int)
    choice = np.full(n, DIAG, dtype=int)

    def bound(k: int, partial: float) -> float:
        lb_x = tail_x[k]
        lb_y = 0.0
        left = cap - used
        if left.any():
            reach = dy_c.copy()
            if k < n:
                reach = np.minimum(reach, pp_c[k:].min(axis=0))
            lb_y = float((left * reach).sum())
        return partial + max(lb_x, lb_y)

    def rec(k: int, partial: float) -> Iterator[Pairing]:
        if bound(k, partial) > thresh:
            return
        if k == n:
            total = partial + float(((cap - used) * dy_c).sum())
            if total <= thresh:
                yield _materialize()
            return
        # coincident x points choose non-decreasing class keys
        lo = -1
        if k > 0 and xcls[k] == xcls[k - 1]:
            lo = choice[k - 1]
        if lo == DIAG:
            choice[k] = DIAG
            yield from rec(k + 1, partial + dx[k])
        for c in range(max(lo, 0), n_ycls):
            if used[c] < cap[c]:
                used[c] += 1
                choice[k] = c
                yield from rec(k + 1, partial + pp_c[k, c])
                used[c] -= 1
        choice[k] = DIAG

    def _materialize() -> Pairing:
        x_to_y = np.full(n, DIAG, dtype=int)
        y_to_x = np.full(m, DIAG, dtype=int)
        taken = np.zeros(n_ycls, dtype=int)
        for i in range(n):
            c = choice[i]
            if c != DIAG:
                j = members[c][taken[c]]
                taken[c] += 1
                x_to_y[i] = j
                y_to_x[j] = i
        return _pairing(x_to_y, y_to_x, matching_cost(xs, ys, x_to_y, y_to_x, ground), ground)

    yield from rec(0, 0.0)


def count_optimal_pairings(
    X: PersistenceDiagram,
    Y: PersistenceDiagram,
    ground: str = EUCLIDEAN,
    tol: float = 1e-9,
    max_points: int = 12,
) -> int:
    """Number of geometrically distinct optimal pairings (see :func:`optimal_pairings`)."""
    return sum(1 for _ in optimal_pairings(X, Y, ground, tol, max_points))
