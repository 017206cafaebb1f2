"""Exact k-nearest-neighbour and disc graphs over a point set.

Construction goes through a uniform cell grid: points are bucketed into
cells of roughly `target_per_cell` expected occupancy, and neighbour
queries scan cells in expanding rings until no unscanned cell can hold a
closer candidate.  The grid is a pure accelerator; results are exact for
any cell size.  Neighbour order and all ties are resolved by
(squared distance, point index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .points import PointSet


class UndefinedRadiusError(ValueError):
    """Raised when a k-th neighbour radius is requested but m <= k."""


@dataclass(frozen=True)
class GridIndex:
    """Uniform-cell bucketing of a point set (nx * ny cells, CSR layout)."""

    points: PointSet
    cell_side: float
    nx: int
    ny: int
    pcx: np.ndarray  # per-point cell column
    pcy: np.ndarray  # per-point cell row
    order: np.ndarray  # point ids sorted by flat cell id
    cell_start: np.ndarray  # exclusive prefix sums, len nx*ny + 1

    def cell_points(self, cx: int, cy: int) -> np.ndarray:
        if not (0 <= cx < self.nx and 0 <= cy < self.ny):
            raise ValueError("cell coordinates outside the grid")
        c = cy * self.nx + cx
        return self.order[self.cell_start[c] : self.cell_start[c + 1]]

    def as_dict(self) -> dict:
        out = {}
        for cx in range(self.nx):
            for cy in range(self.ny):
                ids = self.cell_points(cx, cy)
                if ids.size:
                    out[(cx, cy)] = list(ids)
        return out


def build_index(ps: PointSet, target_per_cell: float = 2.0) -> GridIndex:
    if not np.isfinite(target_per_cell) or target_per_cell <= 0.0:
        raise ValueError(f"target_per_cell must be positive, got {target_per_cell}")
    m = len(ps)
    side = ps.region.side
    if m == 0 or side == 0.0:
        n_side = 1
        cell_side = side if side > 0.0 else 1.0
    else:
        desired = math.sqrt(target_per_cell * ps.region.area / m)
        n_side = max(1, int(round(side / desired))) if desired > 0.0 else 1
        cell_side = side / n_side
    pcx = np.zeros(m, dtype=np.int64)
    pcy = np.zeros(m, dtype=np.int64)
    if m and cell_side > 0.0:
        pcx = np.minimum((ps.x - ps.region.origin_x) / cell_side, n_side - 1).astype(np.int64)
        pcy = np.minimum((ps.y - ps.region.origin_y) / cell_side, n_side - 1).astype(np.int64)
        np.clip(pcx, 0, n_side - 1, out=pcx)
        np.clip(pcy, 0, n_side - 1, out=pcy)
    flat = pcy * n_side + pcx
    order = np.argsort(flat, kind="stable").astype(np.int64)
    counts = np.bincount(flat, minlength=n_side * n_side)
    cell_start = np.zeros(n_side * n_side + 1, dtype=np.int64)
    np.cumsum(counts, out=cell_start[1:])
    return GridIndex(ps, cell_side, n_side, n_side, pcx, pcy, order, cell_start)


class NeighborGraph:
    """Graph over a point set: either k-NN out-lists or a disc-radius edge set.

    For model "knn", out_idx/out_d2 hold, per vertex, the min(k, m-1)
    nearest neighbours sorted by (distance, index); adjacency is the
    symmetrised union of out-edges.  For model "gilbert", the undirected
    edge arrays are stored directly.
    """

    def __init__(self, points, model, k=None, r=None, out_idx=None, out_d2=None, edges=None):
        self.points = points
        self.model = model
        self.k = k
        self.r = r
        self.out_idx = out_idx
        self.out_d2 = out_d2
        self._edges = edges  # (eu, ev) with eu < ev, or None until needed

    @property
    def num_vertices(self) -> int:
        return len(self.points)

    @property
    def width(self) -> int:
        """Stored out-list width, min(k, m-1)."""
        return 0 if self.out_idx is None else self.out_idx.shape[1]

    def undirected_edges(self):
        """Unique undirected edges as (eu, ev) with eu < ev, lexicographic."""
        if self._edges is None:
            m = self.num_vertices
            if self.out_idx is None or self.out_idx.size == 0:
                empty = np.empty(0, dtype=np.int64)
                self._edges = (empty, empty)
            else:
                src = np.repeat(np.arange(m, dtype=np.int64), self.width)
                dst = self.out_idx.ravel()
                lo = np.minimum(src, dst)
                hi = np.maximum(src, dst)
                code = np.unique(lo * m + hi)
                self._edges = (code // m, code % m)
        return self._edges

    def edge_lengths(self) -> np.ndarray:
        eu, ev = self.undirected_edges()
        d = self.points.xy[eu] - self.points.xy[ev]
        return np.sqrt(np.einsum("ij,ij->i", d, d))

    def num_edges(self) -> int:
        return self.undirected_edges()[0].size

    def degrees(self) -> np.ndarray:
        eu, ev = self.undirected_edges()
        return np.bincount(
            np.concatenate([eu, ev]), minlength=self.num_vertices
        ).astype(np.int64)


def build_knn(ps: PointSet, k: int, target_per_cell: float = 2.0, index: GridIndex | None = None) -> NeighborGraph:
    """Exact k-NN graph; k >= 1.  Vertices keep min(k, m-1) neighbours."""
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k!r}")
    k = int(k)
    m = len(ps)
    kk = min(k, max(m - 1, 0))
    out_idx = np.full((m, kk), -1, dtype=np.int64)
    out_d2 = np.full((m, kk), np.inf, dtype=np.float64)
    if m and kk:
        idx = index if index is not None else build_index(ps, target_per_cell)
        _kernels.knn_query(
            np.ascontiguousarray(ps.x),
            np.ascontiguousarray(ps.y),
            idx.pcx,
            idx.pcy,
            idx.order,
            idx.cell_start,
            idx.nx,
            idx.ny,
            idx.cell_side,
            kk,
            out_idx,
            out_d2,
        )
    return NeighborGraph(ps, "knn", k=k, out_idx=out_idx, out_d2=out_d2)


def restrict_k(g: NeighborGraph, k: int) -> NeighborGraph:
    """View of a k-NN graph at a smaller k; shares the out-list storage.

    Valid because out-lists are sorted: the first k entries of a k'-NN
    list (k <= k') are exactly the k-NN list.
    """
    if g.model != "knn":
        raise ValueError("restrict_k applies to knn graphs")
    if not 1 <= k <= g.k:
        raise ValueError(f"k must be in [1, {g.k}], got {k}")
    kk = min(k, g.width)
    return NeighborGraph(
        g.points, "knn", k=k, out_idx=g.out_idx[:, :kk], out_d2=g.out_d2[:, :kk]
    )


def build_gilbert(ps: PointSet, r: float, target_per_cell: float = 2.0, index: GridIndex | None = None) -> NeighborGraph:
    """Disc graph: u ~ v iff |u - v| <= r.  r must be finite and >= 0."""
    if not np.isfinite(r) or r < 0.0:
        raise ValueError(f"disc radius must be finite and >= 0, got {r}")
    m = len(ps)
    empty = np.empty(0, dtype=np.int64)
    if m < 2:
        return NeighborGraph(ps, "gilbert", r=float(r), edges=(empty, empty))
    idx = index if index is not None else build_index(ps, target_per_cell)
    window = idx.nx + idx.ny  # covers the grid
    if idx.cell_side > 0.0:
        window = min(window, int(math.ceil(r / idx.cell_side)))
    x = np.ascontiguousarray(ps.x)
    y = np.ascontiguousarray(ps.y)
    n_edges = _kernels.gilbert_count(
        x, y, idx.pcx, idx.pcy, idx.order, idx.cell_start, idx.nx, idx.ny, window, r * r
    )
    eu = np.empty(n_edges, dtype=np.int64)
    ev = np.empty(n_edges, dtype=np.int64)
    _kernels.gilbert_fill(
        x, y, idx.pcx, idx.pcy, idx.order, idx.cell_start, idx.nx, idx.ny, window, r * r, eu, ev
    )
    code = np.sort(eu * m + ev)
    return NeighborGraph(ps, "gilbert", r=float(r), edges=(code // m, code % m))


def kth_nn_radius(g: NeighborGraph, v: int) -> float:
    """Distance from vertex v to its k-th nearest neighbour."""
    if g.model != "knn":
        raise ValueError("kth_nn_radius applies to knn graphs")
    if not 0 <= v < g.num_vertices:
        raise ValueError(f"vertex {v} out of range")
    if g.width < g.k:
        raise UndefinedRadiusError(
            f"k-th neighbour radius undefined: m={g.num_vertices} <= k={g.k}"
        )
    return float(math.sqrt(g.out_d2[v, g.k - 1]))


def longest_edge(g: NeighborGraph) -> float:
    """Largest edge length; 0.0 for an edgeless graph."""
    if g.model == "knn":
        if g.out_d2 is None or g.out_d2.size == 0:
            return 0.0
        return float(math.sqrt(g.out_d2.max()))
    lens = g.edge_lengths()
    return float(lens.max()) if lens.size else 0.0


def write_graph_csv(g: NeighborGraph, path) -> None:
    """Dump undirected edges as u,v,length rows with a model comment line."""
    if g.model == "knn":
        header = f"# model=knn k={g.k}"
    else:
        header = f"# model=gilbert r={g.r:.17g}"
    eu, ev = g.undirected_edges()
    lens = g.edge_lengths()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header + "\n")
        f.write("u,v,length\n")
        for a, b, d in zip(eu, ev, lens):
            f.write(f"{a},{b},{d:.17g}\n")
