"""Persistent homology of lower-star filtrations on a square cubical grid.

Cells are the grid vertices, the horizontal and vertical unit edges and the
unit squares.  A cell enters at the largest value among its vertices, and
cells are totally ordered by ``(value, dimension, index)``.  Dimension-0
pairs come from union-find with the elder rule, dimension-1 pairs from
reducing the square-to-edge boundary matrix over Z/2.  The full reduction of
both boundary matrices is also exposed as an independent reference.

:func:`sublevel_persistence` computes the superlevel persistence of a field
as sublevel persistence of its negation, so returned pairs are in negated
units with ``birth < death``.
"""

from __future__ import annotations

import math

import numpy as np

from .diagram import PersistenceDiagram
from .fields import ScalarField


class CubicalGrid:
    """Cells and lower-star values of the cubical complex on a ``g x g`` grid."""

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=float)
        g = v.shape[0]
        self.g = g
        self.vertex_values = v.ravel()
        vid = np.arange(g * g).reshape(g, g)
        h = np.column_stack([vid[:, :-1].ravel(), vid[:, 1:].ravel()])
        vert = np.column_stack([vid[:-1, :].ravel(), vid[1:, :].ravel()])
        self.edges = np.concatenate([h, vert])
        nh = len(h)
        # square (i, j) is bounded by horizontal edges on rows i, i+1 and
        # vertical edges on columns j, j+1
        ii, jj = np.meshgrid(np.arange(g - 1), np.arange(g - 1), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        top = ii * (g - 1) + jj
        bottom = (ii + 1) * (g - 1) + jj
        left = nh + ii * g + jj
        right = nh + ii * g + jj + 1
        self.squares = np.column_stack([top, bottom, left, right])
        corners = np.column_stack(
            [vid[:-1, :-1].ravel(), vid[:-1, 1:].ravel(), vid[1:, :-1].ravel(), vid[1:, 1:].ravel()]
        )
        self.edge_values = self.vertex_values[self.edges].max(axis=1)
        self.square_values = self.vertex_values[corners].max(axis=1)

    def order(self, dim: int) -> np.ndarray:
        """Rank of each cell of dimension ``dim`` within its own dimension."""
        vals = (self.vertex_values, self.edge_values, self.square_values)[dim]
        idx = np.lexsort((np.arange(len(vals)), vals))
        rank = np.empty(len(vals), dtype=np.int64)
        rank[idx] = np.arange(len(vals))
        return rank

    def counts_at(self, level: float) -> tuple[int, int, int]:
        return (
            int((self.vertex_values <= level).sum()),
            int((self.edge_values <= level).sum()),
            int((self.square_values <= level).sum()),
        )


def _h0_union_find(grid: CubicalGrid) -> list[tuple[float, float]]:
    vrank = grid.order(0)
    parent = np.arange(len(vrank))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    pairs = []
    vv = grid.vertex_values
    # an edge enters after both of its vertices, so scanning edges in order
    # sees exactly the components present at that moment
    for e in np.lexsort((np.arange(len(grid.edges)), grid.edge_values)):
        a, b = find(int(grid.edges[e, 0])), find(int(grid.edges[e, 1]))
        if a == b:
            continue
        # roots are the oldest vertex of their component; the younger one dies
        if vrank[a] < vrank[b]:
            a, b = b, a
        pairs.append((float(vv[a]), float(grid.edge_values[e])))
        parent[a] = b
    return pairs


def _reduce(columns: list[int]) -> list[int]:
    """Standard Z/2 column reduction of bitset columns.  Returns the pivots (-1 for zero)."""
    owner: dict[int, int] = {}
    pivots = []
    for j, col in enumerate(columns):
        while col:
            p = col.bit_length() - 1
            k = owner.get(p)
            if k is None:
                owner[p] = j
                break
            col ^= columns[k]
        columns[j] = col
        pivots.append(col.bit_length() - 1 if col else -1)
    return pivots


def _boundary_pairs(grid: CubicalGrid, dim: int):
    """Reduce the boundary matrix of the ``dim``-cells (dim 1 or 2).

    Returns the pairs, the ranks of the ``dim - 1`` cells that get killed and
    the ranks of the ``dim``-cells that kill something.
    """
    if dim == 1:
        cells, face_vals, cell_vals = grid.edges, grid.vertex_values, grid.edge_values
    else:
        cells, face_vals, cell_vals = grid.squares, grid.edge_values, grid.square_values
    face_rank = grid.order(dim - 1)
    cell_rank = grid.order(dim)
    by_rank = np.argsort(face_rank)
    cell_order = np.argsort(cell_rank)
    columns = []
    for c in cell_order:
        col = 0
        for f in cells[c]:
            col ^= 1 << int(face_rank[f])
        columns.append(col)
    pivots = _reduce(columns)
    pairs, killed, negative = [], set(), set()
    for r, (c, p) in enumerate(zip(cell_order, pivots)):
        if p >= 0:
            killed.add(p)
            negative.add(r)
            pairs.append((float(face_vals[by_rank[p]]), float(cell_vals[c])))
    return pairs, killed, negative


def _finite(pairs) -> list[tuple[float, float]]:
    return [(b, d) for b, d in pairs if d > b]


def _grid(field) -> CubicalGrid:
    values = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    return CubicalGrid(values)


def h0_union_find(filtration_values) -> PersistenceDiagram:
    """Finite dimension-0 pairs of the sublevel filtration of the given grid values."""
    return PersistenceDiagram(_finite(_h0_union_find(_grid(filtration_values))))


def h0_reduction(filtration_values) -> PersistenceDiagram:
    """Same as :func:`h0_union_find`, via reduction of the edge boundary matrix."""
    pairs, _, _ = _boundary_pairs(_grid(filtration_values), 1)
    return PersistenceDiagram(_finite(pairs))


def h1_reduction(filtration_values) -> PersistenceDiagram:
    pairs, _, _ = _boundary_pairs(_grid(filtration_values), 2)
    return PersistenceDiagram(_finite(pairs))


def all_pairs(filtration_values) -> list[tuple[int, float, float]]:
    """Every ``(dimension, birth, death)`` pair including infinite and zero-length ones."""
    grid = _grid(filtration_values)
    p1, dead_v, neg_e = _boundary_pairs(grid, 1)
    p2, dead_e, _ = _boundary_pairs(grid, 2)
    out = [(0, b, d) for b, d in p1] + [(1, b, d) for b, d in p2]
    vrank, erank = grid.order(0), grid.order(1)
    for v in np.argsort(vrank):
        if vrank[v] not in dead_v:
            out.append((0, float(grid.vertex_values[v]), math.inf))
    for e in np.argsort(erank):
        r = int(erank[e])
        if r not in neg_e and r not in dead_e:
            out.append((1, float(grid.edge_values[e]), math.inf))
    return out


def sublevel_persistence(field: ScalarField, dimension: int) -> PersistenceDiagram:
    """Superlevel persistence of ``field`` as sublevel persistence of ``-field``.

    Infinite and zero-length pairs are dropped.
    """
    if dimension not in (0, 1):
        raise ValueError(f"dimension must be 0 or 1, got {dimension!r}")
    neg = -np.asarray(field.values if isinstance(field, ScalarField) else field, dtype=float)
    if dimension == 0:
        return h0_union_find(neg)
    return h1_reduction(neg)
