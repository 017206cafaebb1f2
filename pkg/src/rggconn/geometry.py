"""Planar helpers: convex hulls, exact diameters, segment/cell walks."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels

# components at or below this size get the all-pairs diameter kernel;
# larger ones go through hull + rotating calipers (both exact)
_BRUTE_DIAMETER_LIMIT = 512


def convex_hull(xy: np.ndarray) -> np.ndarray:
    """Indices of the convex hull in counter-clockwise order (monotone chain).

    Collinear points interior to hull edges are dropped; for one or two
    distinct points the hull degenerates accordingly.
    """
    xy = np.asarray(xy, dtype=np.float64)
    m = xy.shape[0]
    if m == 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    if m <= 2:
        return order.astype(np.int64)

    def half(indices):
        chain = []
        for i in indices:
            while len(chain) >= 2:
                a = chain[-2]
                b = chain[-1]
                cross = (xy[b, 0] - xy[a, 0]) * (xy[i, 1] - xy[a, 1]) - (
                    xy[b, 1] - xy[a, 1]
                ) * (xy[i, 0] - xy[a, 0])
                if cross <= 0.0:
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(order[::-1])
    hull = lower[:-1] + upper[:-1]
    if not hull:  # all points coincident or collinear ties
        hull = [order[0]]
    return np.asarray(hull, dtype=np.int64)


def diameter(xy: np.ndarray) -> float:
    """Exact Euclidean diameter: max pairwise distance over the points."""
    xy = np.asarray(xy, dtype=np.float64)
    m = xy.shape[0]
    if m <= 1:
        return 0.0
    if m <= _BRUTE_DIAMETER_LIMIT:
        return float(
            math.sqrt(
                _kernels.pair_diameter2(
                    np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1])
                )
            )
        )
    hull = convex_hull(xy)
    hx = np.ascontiguousarray(xy[hull, 0])
    hy = np.ascontiguousarray(xy[hull, 1])
    if hull.size <= _BRUTE_DIAMETER_LIMIT:
        return float(math.sqrt(_kernels.pair_diameter2(hx, hy)))
    return float(math.sqrt(_calipers_diameter2(xy[hull])))


def _calipers_diameter2(hull_xy: np.ndarray) -> float:
    # rotating calipers over the upper/lower monotone chains
    pts = hull_xy[np.lexsort((hull_xy[:, 1], hull_xy[:, 0]))]
    lower = []
    upper = []
    for p in pts:
        while len(lower) >= 2 and np.cross(lower[-1] - lower[-2], p - lower[-2]) <= 0:
            lower.pop()
        lower.append(p)
        while len(upper) >= 2 and np.cross(upper[-1] - upper[-2], p - upper[-2]) >= 0:
            upper.pop()
        upper.append(p)
    i = 0
    j = len(lower) - 1
    best = 0.0
    while i < len(upper) - 1 or j > 0:
        d = upper[i] - lower[j]
        best = max(best, float(d[0] * d[0] + d[1] * d[1]))
        if i == len(upper) - 1:
            j -= 1
        elif j == 0:
            i += 1
        else:
            du = upper[i + 1] - upper[i]
            dl = lower[j] - lower[j - 1]
            if du[1] * dl[0] > dl[1] * du[0]:
                i += 1
            else:
                j -= 1
    d = upper[-1] - lower[0]
    best = max(best, float(d[0] * d[0] + d[1] * d[1]))
    return best


def segment_cells(p, q, x0: float, y0: float, cell_side: float, nx: int, ny: int) -> set:
    """Grid cells met by the closed segment p-q, clipped to an nx*ny grid.

    The segment is cut at every gridline crossing and each piece is
    assigned the cell of its midpoint, so for segments in general
    position (endpoints off the gridlines) the walk is exact.
    """
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    dx = qx - px
    dy = qy - py
    ts = [0.0, 1.0]
    if cell_side <= 0.0:
        raise ValueError("cell_side must be positive")
    for lo, d, o, n in ((px, dx, x0, nx), (py, dy, y0, ny)):
        if d == 0.0:
            continue
        a = (lo - o) / cell_side
        b = (lo + d - o) / cell_side
        for line in range(int(math.floor(min(a, b))) + 1, int(math.ceil(max(a, b)))):
            t = (o + line * cell_side - lo) / d
            if 0.0 < t < 1.0:
                ts.append(t)
    ts.sort()
    cells = set()
    for t0, t1 in zip(ts[:-1], ts[1:]):
        if t1 <= t0:
            continue
        tm = 0.5 * (t0 + t1)
        cx = int(math.floor((px + tm * dx - x0) / cell_side))
        cy = int(math.floor((py + tm * dy - y0) / cell_side))
        if 0 <= cx < nx and 0 <= cy < ny:
            cells.add((cx, cy))
    return cells
