"""Connected components, exact diameters, and Menger-certified s-connectivity.

Vertex connectivity is certified by unit-capacity max-flow on the
vertex-split digraph: every vertex u becomes an arc in(u)->out(u) of
capacity one, so an s-t flow value equals the number of internally
disjoint paths.  The global value follows the standard exact scheme: fix
a vertex v of minimum degree, run flows from v to every non-neighbour,
then between every non-adjacent pair of neighbours of v.  A running
minimum caps later flows and allows early exit as soon as any cut
smaller than the requested s appears.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, geometry
from .knn import NeighborGraph


@dataclass(frozen=True)
class ComponentDecomposition:
    """Vertex labels plus per-component size, members, diameter, bbox."""

    labels: np.ndarray  # (m,) component id per vertex, ids in first-vertex order
    count: int
    sizes: np.ndarray  # (count,)
    members: tuple  # tuple of index arrays, one per component
    diameters: np.ndarray  # (count,) exact Euclidean diameters
    bounding_boxes: np.ndarray  # (count, 4): xmin, ymin, xmax, ymax


def _labels(g: NeighborGraph) -> tuple[np.ndarray, int]:
    m = g.num_vertices
    labels = np.zeros(m, dtype=np.int64)
    if m == 0:
        return labels, 0
    if g.model == "knn" and g.out_idx is not None and g.width > 0:
        count = _kernels.components_from_outlists(g.out_idx, g.width, labels)
    else:
        eu, ev = g.undirected_edges()
        count = _kernels.components_from_edges(m, eu, ev, labels)
    return labels, int(count)


def count_components(g: NeighborGraph) -> int:
    return _labels(g)[1]


def component_labels(g: NeighborGraph) -> np.ndarray:
    return _labels(g)[0]


def connected_components(g: NeighborGraph) -> ComponentDecomposition:
    labels, count = _labels(g)
    m = g.num_vertices
    if count == 0:
        return ComponentDecomposition(
            labels,
            0,
            np.zeros(0, dtype=np.int64),
            (),
            np.zeros(0),
            np.zeros((0, 4)),
        )
    sizes = np.bincount(labels, minlength=count).astype(np.int64)
    order = np.argsort(labels, kind="stable")
    bounds = np.zeros(count + 1, dtype=np.int64)
    np.cumsum(sizes, out=bounds[1:])
    members = tuple(order[bounds[c] : bounds[c + 1]] for c in range(count))
    diameters = np.zeros(count, dtype=np.float64)
    boxes = np.zeros((count, 4), dtype=np.float64)
    xy = g.points.xy
    for c, mem in enumerate(members):
        pts = xy[mem]
        diameters[c] = geometry.diameter(pts)
        boxes[c] = (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
    return ComponentDecomposition(labels, count, sizes, members, diameters, boxes)


def is_connected(g: NeighborGraph) -> bool:
    """True iff the graph has at most one component (m of 0 or 1 counts)."""
    if g.num_vertices <= 1:
        return True
    return count_components(g) <= 1


def isolated_vertices(g: NeighborGraph) -> np.ndarray:
    """Degree-zero vertices.  Empty for any k-NN graph with m >= 2."""
    if g.num_vertices == 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(g.degrees() == 0).astype(np.int64)


def _simple_csr(m: int, eu: np.ndarray, ev: np.ndarray):
    """CSR adjacency of the undirected edge list, plus per-arc edge ids."""
    tails = np.concatenate([eu, ev])
    heads = np.concatenate([ev, eu])
    eids = np.concatenate([np.arange(eu.size, dtype=np.int64)] * 2)
    order = np.argsort(tails, kind="stable")
    deg = np.bincount(tails, minlength=m)
    ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(deg, out=ptr[1:])
    return ptr, heads[order].astype(np.int64), eids[order]


def _split_csr(m: int, eu: np.ndarray, ev: np.ndarray):
    """Vertex-split digraph in CSR arc form with xor-paired residual arcs."""
    n_edges = eu.size
    n_arcs = 2 * m + 4 * n_edges
    tail = np.empty(n_arcs, dtype=np.int64)
    head = np.empty(n_arcs, dtype=np.int64)
    cap = np.zeros(n_arcs, dtype=np.int8)
    u = np.arange(m, dtype=np.int64)
    # internal arcs: in(u) -> out(u) capacity 1, residual partner 0
    tail[0 : 2 * m : 2] = 2 * u
    head[0 : 2 * m : 2] = 2 * u + 1
    cap[0 : 2 * m : 2] = 1
    tail[1 : 2 * m : 2] = 2 * u + 1
    head[1 : 2 * m : 2] = 2 * u
    base = 2 * m
    if n_edges:
        j = np.arange(n_edges, dtype=np.int64)
        tail[base + 4 * j] = 2 * eu + 1
        head[base + 4 * j] = 2 * ev
        cap[base + 4 * j] = 1
        tail[base + 4 * j + 1] = 2 * ev
        head[base + 4 * j + 1] = 2 * eu + 1
        tail[base + 4 * j + 2] = 2 * ev + 1
        head[base + 4 * j + 2] = 2 * eu
        cap[base + 4 * j + 2] = 1
        tail[base + 4 * j + 3] = 2 * eu
        head[base + 4 * j + 3] = 2 * ev + 1
    order = np.argsort(tail, kind="stable")
    node_ptr = np.zeros(2 * m + 1, dtype=np.int64)
    np.cumsum(np.bincount(tail, minlength=2 * m), out=node_ptr[1:])
    pos = np.empty(n_arcs, dtype=np.int64)
    pos[order] = np.arange(n_arcs, dtype=np.int64)
    arc_rev = pos[order ^ 1]
    return node_ptr, head[order], tail[order], arc_rev, cap[order]


def _spread_bits(a: np.ndarray) -> np.ndarray:
    a = a & 0xFFFF
    a = (a | (a << 8)) & 0x00FF00FF
    a = (a | (a << 4)) & 0x0F0F0F0F
    a = (a | (a << 2)) & 0x33333333
    return (a | (a << 1)) & 0x55555555


def _morton_codes(xy: np.ndarray) -> np.ndarray:
    """Z-order curve code per point, on a 16-bit quantisation of the bbox."""
    if xy.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo
    span[span == 0.0] = 1.0
    q = np.minimum((xy - lo) / span * 65535.0, 65535.0).astype(np.int64)
    return _spread_bits(q[:, 0]) | (_spread_bits(q[:, 1]) << 1)


def _kappa_capped(g: NeighborGraph, cap: int, exit_below: int) -> int:
    """min(kappa(g), cap), early-exiting once the value is < exit_below."""
    m = g.num_vertices
    eu, ev = g.undirected_edges()
    if cap < m - 1 and eu.size > cap * (m - 1):
        # Sparse certificate: the union of the first `cap` scan-first-search
        # forests has the same capped connectivity as the full graph, so the
        # flow computations can run on far fewer arcs.
        sptr, sadj, seid = _simple_csr(m, eu, ev)
        lab = _kernels.forest_labels(m, sptr, sadj, seid, eu.size)
        keep = lab <= cap
        eu = eu[keep]
        ev = ev[keep]
    deg = np.bincount(np.concatenate([eu, ev]), minlength=m)
    v = int(np.argmin(deg))
    init_cap = int(min(cap, deg[v], m - 1))
    if init_cap <= 0:
        return 0
    sptr, sadj, _ = _simple_csr(m, eu, ev)
    neigh = np.sort(sadj[sptr[v] : sptr[v + 1]])
    non_neighbors = np.setdiff1d(
        np.arange(m, dtype=np.int64), np.concatenate([neigh, [v]]), assume_unique=False
    )
    # Walk targets along a Z-order curve so consecutive sinks are spatial
    # neighbours; the flow kernel reuses flow parked at recent sinks and
    # profits exactly when the next sink sits a few arcs away.
    non_neighbors = non_neighbors[np.argsort(_morton_codes(g.points.xy[non_neighbors]), kind="stable")]
    adjacent = set((int(a) * m + int(b)) for a, b in zip(eu, ev))
    pa = []
    pb = []
    for i in range(neigh.size):
        for j in range(i + 1, neigh.size):
            a, b = int(neigh[i]), int(neigh[j])
            if a * m + b not in adjacent:
                pa.append(a)
                pb.append(b)
    node_ptr, arc_to, arc_tail, arc_rev, cap0 = _split_csr(m, eu, ev)
    return int(
        _kernels.kappa_capped(
            node_ptr,
            arc_to,
            arc_tail,
            arc_rev,
            cap0,
            v,
            non_neighbors,
            np.asarray(pa, dtype=np.int64),
            np.asarray(pb, dtype=np.int64),
            init_cap,
            exit_below,
        )
    )


def vertex_connectivity(g: NeighborGraph, cap: int | None = None) -> int:
    """Exact vertex connectivity (optionally capped at `cap`).

    0 for disconnected graphs and for m <= 1; m - 1 for complete graphs.
    """
    m = g.num_vertices
    if m <= 1:
        return 0
    if not is_connected(g):
        return 0
    limit = m - 1 if cap is None else int(cap)
    if limit <= 0:
        return 0
    return _kappa_capped(g, limit, 0)


def is_s_connected(g: NeighborGraph, s: int) -> bool:
    """True iff m > s and no vertex cut of size < s disconnects the graph."""
    if not isinstance(s, (int, np.integer)) or isinstance(s, bool) or s < 1:
        raise ValueError(f"s must be an integer >= 1, got {s!r}")
    s = int(s)
    m = g.num_vertices
    if m <= s:
        return False
    if s == 1:
        return is_connected(g)
    if not is_connected(g):
        return False
    if int(g.degrees().min()) < s:  # kappa <= min degree, exactly
        return False
    return _kappa_capped(g, s, s) >= s
