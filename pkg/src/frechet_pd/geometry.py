"""Geodesics, curvature checks and supporting vectors in diagram space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .assignment import DIAG, Pairing, distance, match_arrays, optimal_pairing
from .diagram import EUCLIDEAN, PersistenceDiagram, project_array

GEOMETRY_TOL = 1e-9


@dataclass(frozen=True)
class Geodesic:
    """Straight-line interpolation of matched points under a fixed pairing.

    The pairing is stored once; :meth:`evaluate` never re-solves.  Build with
    :meth:`between` to use the solver's optimal pairing, or pass any optimal
    pairing explicitly (e.g. one of several tied ones).
    """

    start: PersistenceDiagram
    end: PersistenceDiagram
    pairing: Pairing

    @classmethod
    def between(cls, start: PersistenceDiagram, end: PersistenceDiagram) -> "Geodesic":
        return cls(start, end, optimal_pairing(start, end, EUCLIDEAN))

    @property
    def length(self) -> float:
        return math.sqrt(self.pairing.cost)

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Matched ``(source, target)`` point arrays, diagonal ends projected."""
        xs, ys = self.start.points, self.end.points
        s2t = np.asarray(self.pairing.source_to_target, dtype=int)
        t2s = np.asarray(self.pairing.target_to_source, dtype=int)
        src = [xs]
        dst = [np.empty_like(xs)]
        hit = s2t != DIAG
        dst[0][hit] = ys[s2t[hit]]
        dst[0][~hit] = project_array(xs[~hit])
        orphans = ys[t2s == DIAG]
        src.append(project_array(orphans))
        dst.append(orphans)
        return np.concatenate(src), np.concatenate(dst)

    def evaluate(self, t: float) -> PersistenceDiagram:
        return evaluate_geodesic(self, t)


def evaluate_geodesic(g: Geodesic, t: float) -> PersistenceDiagram:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"geodesic parameter must lie in [0, 1], got {t!r}")
    a, b = g.endpoints()
    if t == 0.0:
        pts = a
    elif t == 1.0:
        pts = b
    else:
        pts = (1.0 - t) * a + t * b
    return PersistenceDiagram.from_array(pts, drop_diagonal=True)


@dataclass(frozen=True)
class AlexandrovCheck:
    lhs: float
    rhs: float
    holds: bool


def check_alexandrov(
    X: PersistenceDiagram, Y: PersistenceDiagram, Z: PersistenceDiagram, t: float
) -> AlexandrovCheck:
    """Compare ``d(Z, g(t))^2`` with its flat-space comparison value, where ``g``
    is the geodesic from ``X`` to ``Y``; non-negative curvature means lhs >= rhs."""
    g = Geodesic.between(X, Y)
    lhs = distance(Z, g.evaluate(t)) ** 2
    dxy2 = g.pairing.cost
    rhs = t * distance(Z, Y) ** 2 + (1.0 - t) * distance(Z, X) ** 2 - t * (1.0 - t) * dxy2
    return AlexandrovCheck(lhs, rhs, lhs >= rhs - GEOMETRY_TOL)


@dataclass(frozen=True)
class TangentVector:
    """Extrinsic tangent vector at ``base``.

    ``vectors[j]`` is attached to the j-th off-diagonal point of ``base``.
    ``diagonal_vectors`` holds vectors attached to separate diagonal copies,
    one per input point matched to the diagonal; ``diagonal_anchors`` are the
    corresponding foot points on the diagonal.
    """

    base: PersistenceDiagram
    vectors: np.ndarray
    diagonal_anchors: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    diagonal_vectors: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def norm(self) -> float:
        return math.sqrt(
            math.fsum((self.vectors**2).ravel()) + math.fsum((self.diagonal_vectors**2).ravel())
        )


def supporting_vector_arrays(
    ypts: np.ndarray,
    diagrams: Sequence[PersistenceDiagram],
    weights: Sequence[float] | None = None,
    matches: Sequence[tuple[np.ndarray, np.ndarray]] | None = None,
):
    """Array form of :func:`supporting_vector`.

    ``matches`` optionally supplies precomputed ``(y_to_x, x_to_y)`` index
    arrays per diagram.  Returns ``(vectors, anchors, diagonal_vectors)``.
    """
    w = np.ones(len(diagrams)) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    vec = np.zeros_like(ypts, dtype=float)
    proj = project_array(ypts)
    anchors, dvecs = [], []
    for i, X in enumerate(diagrams):
        xs = X.points
        if matches is None:
            x_to_y, y_to_x, _ = match_arrays(xs, ypts, EUCLIDEAN)
        else:
            y_to_x, x_to_y = matches[i]
        hit = y_to_x != DIAG
        target = proj.copy()
        target[hit] = xs[y_to_x[hit]]
        vec += (2.0 * w[i] / total) * (target - ypts)
        lone = xs[x_to_y == DIAG]
        if len(lone):
            foot = project_array(lone)
            anchors.append(foot)
            dvecs.append((2.0 * w[i] / total) * (lone - foot))
    anchors = np.concatenate(anchors) if anchors else np.empty((0, 2))
    dvecs = np.concatenate(dvecs) if dvecs else np.empty((0, 2))
    return vec, anchors, dvecs


def supporting_vector(
    Y: PersistenceDiagram,
    diagrams: Sequence[PersistenceDiagram],
    weights: Sequence[float] | None = None,
) -> TangentVector:
    """Supporting vector of the Frechet function of ``diagrams`` at ``Y``.

    Each point ``y`` receives ``(2/m) * sum_i (phi_i(y) - y)`` where ``phi_i`` is
    the optimal pairing to diagram ``i`` (diagonal targets contribute the
    projection of ``y``).  Input points matched to the diagonal contribute a
    vector at their own diagonal copy.  It vanishes at every local minimum.
    """
    vec, anchors, dvecs = supporting_vector_arrays(Y.points, diagrams, weights)
    return TangentVector(Y, vec, anchors, dvecs)


def semiconcavity_probe(
    X: PersistenceDiagram, g: Geodesic, s1: float, s2: float, t: float
) -> bool:
    """Midpoint-type concavity test of ``s -> d(g(s), X)^2 - s^2``.

    ``g`` is parametrized by arc length on ``[0, g.length]``.
    """
    L = g.length
    if not (0.0 <= s1 <= s2 <= L + GEOMETRY_TOL) or not 0.0 <= t <= 1.0:
        raise ValueError("need 0 <= s1 <= s2 <= length and t in [0, 1]")

    def g_x(s: float) -> float:
        u = 0.0 if L == 0.0 else min(s / L, 1.0)
        return distance(g.evaluate(u), X) ** 2 - s * s

    s = t * s1 + (1.0 - t) * s2
    return g_x(s) >= t * g_x(s1) + (1.0 - t) * g_x(s2) - GEOMETRY_TOL
