"""Persistence diagrams, diagonal geometry and persistence filters.

A diagram stores only its off-diagonal points; the infinitely many copies of
the diagonal are implicit.  Points are kept in canonical lexicographic order
of ``(birth, death)`` so that equal multisets compare (and serialize)
identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

EUCLIDEAN = "euclidean"
CHEBYSHEV = "chebyshev"
GROUND_NORMS = (EUCLIDEAN, CHEBYSHEV)

SQRT2 = math.sqrt(2.0)


class _Diagonal:
    """Sentinel standing for one copy of the diagonal."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIAGONAL"

    def __reduce__(self):
        return (_Diagonal, ())


DIAGONAL = _Diagonal()


@dataclass(frozen=True, slots=True)
class DiagramPoint:
    birth: float
    death: float

    def __post_init__(self) -> None:
        b, d = float(self.birth), float(self.death)
        if not (math.isfinite(b) and math.isfinite(d)):
            raise ValueError(f"point ({b!r}, {d!r}): coordinates must be finite")
        if not d > b:
            raise ValueError(f"point ({b!r}, {d!r}): death must exceed birth")
        object.__setattr__(self, "birth", b)
        object.__setattr__(self, "death", d)

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    def __iter__(self) -> Iterator[float]:
        yield self.birth
        yield self.death


PointLike = Union[DiagramPoint, tuple, list, np.ndarray]


def _check_ground(norm: str) -> None:
    if norm not in GROUND_NORMS:
        raise ValueError(f"unknown ground norm {norm!r}; expected one of {GROUND_NORMS}")


def diagonal_projection(p: PointLike) -> tuple[float, float]:
    """Nearest diagonal point to ``p`` in the Euclidean norm."""
    b, d = p
    mid = 0.5 * (float(b) + float(d))
    return (mid, mid)


def diagonal_distance(p: PointLike, norm: str = EUCLIDEAN) -> float:
    """Distance from ``p`` to the diagonal under the given ground norm."""
    _check_ground(norm)
    b, d = p
    pers = float(d) - float(b)
    return pers / SQRT2 if norm == EUCLIDEAN else pers / 2.0


def project_array(points: np.ndarray) -> np.ndarray:
    mid = 0.5 * (points[:, 0] + points[:, 1])
    return np.column_stack([mid, mid])


def diagonal_cost_array(points: np.ndarray, norm: str = EUCLIDEAN) -> np.ndarray:
    """Squared diagonal distance of every row of ``points``."""
    pers = points[:, 1] - points[:, 0]
    if norm == EUCLIDEAN:
        return 0.5 * pers * pers
    return 0.25 * pers * pers


class PersistenceDiagram:
    """Immutable finite multiset of off-diagonal points.

    ``points`` may be any iterable of ``(birth, death)`` pairs or an ``(n, 2)``
    array.  Points with ``death <= birth`` or non-finite coordinates raise
    ``ValueError``; use :meth:`from_array` with ``drop_diagonal=True`` when
    interpolated points may land exactly on the diagonal.
    """

    __slots__ = ("_pts",)

    def __init__(self, points: Iterable[PointLike] | np.ndarray = ()):
        arr = _as_point_array(points)
        for i, (b, d) in enumerate(arr.tolist()):
            if not (math.isfinite(b) and math.isfinite(d)):
                raise ValueError(f"point #{i} ({b!r}, {d!r}): coordinates must be finite")
            if not d > b:
                raise ValueError(f"point #{i} ({b!r}, {d!r}): death must exceed birth")
        self._pts = _canonical(arr)

    @classmethod
    def from_array(cls, arr: np.ndarray, drop_diagonal: bool = False) -> "PersistenceDiagram":
        arr = _as_point_array(arr)
        if drop_diagonal and len(arr):
            arr = arr[arr[:, 1] > arr[:, 0]]
        return cls(arr)

    @classmethod
    def empty(cls) -> "PersistenceDiagram":
        return cls(())

    @property
    def points(self) -> np.ndarray:
        """Read-only ``(n, 2)`` array of ``(birth, death)`` rows."""
        return self._pts

    @property
    def births(self) -> np.ndarray:
        return self._pts[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self._pts[:, 1]

    @property
    def persistence(self) -> np.ndarray:
        return self._pts[:, 1] - self._pts[:, 0]

    def __len__(self) -> int:
        return len(self._pts)

    def __iter__(self) -> Iterator[DiagramPoint]:
        for b, d in self._pts:
            yield DiagramPoint(b, d)

    def __getitem__(self, i: int) -> DiagramPoint:
        b, d = self._pts[i]
        return DiagramPoint(b, d)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self._pts.shape == other._pts.shape and bool(np.array_equal(self._pts, other._pts))

    def __hash__(self) -> int:
        return hash(self._pts.tobytes())

    def __repr__(self) -> str:
        inner = ", ".join(f"({float(b)!r}, {float(d)!r})" for b, d in self._pts)
        return f"PersistenceDiagram([{inner}])"

    def to_list(self) -> list[list[float]]:
        return [[float(b), float(d)] for b, d in self._pts]

    def prune(self, eps: float) -> "PersistenceDiagram":
        """Drop points whose persistence is below ``eps``."""
        return PersistenceDiagram(self._pts[self.persistence >= eps])


def _as_point_array(points) -> np.ndarray:
    if isinstance(points, PersistenceDiagram):
        return points.points
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) birth/death pairs, got shape {arr.shape}")
    return arr


def _canonical(arr: np.ndarray) -> np.ndarray:
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    out = np.ascontiguousarray(arr[order], dtype=float)
    out.setflags(write=False)
    return out


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")


def upper_filter(Z: PersistenceDiagram, alpha: float) -> PersistenceDiagram:
    """Points with persistence at least ``alpha``."""
    _check_alpha(alpha)
    return PersistenceDiagram(Z.points[Z.persistence >= alpha])


def lower_filter(Z: PersistenceDiagram, alpha: float) -> PersistenceDiagram:
    """Points with persistence strictly below ``alpha``."""
    _check_alpha(alpha)
    return PersistenceDiagram(Z.points[Z.persistence < alpha])
