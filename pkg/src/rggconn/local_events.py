"""Local obstruction events in scaled boxes, and their geometric certificates.

The box for scale n and factor M is the square of side M*sqrt(log n)
centered at the origin.  The obstruction event at neighbour count k is
"some connected component of the box's k-NN graph lies strictly inside
the concentric half-side subsquare".  On top of that sit the tile
refinements (a component plus an overfull tile), the two box covers used
to localize a global sample, the hexagonal hull of a witness component
with its reflected empty caps, and the curve/tile counting bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .analysis import component_labels
from .knn import NeighborGraph, build_knn, kth_nn_radius, longest_edge
from .points import PointSet, Region, sample_poisson

DEFAULT_M = 30
DEFAULT_N = 16
DEFAULT_ETA = 0.25

# unit offsets of the six hull normals, exact: angles 30 + 60*i degrees,
# so edge directions are 0, 60 and 120 degrees; edge 2 is the top edge
# (normal (0,1)) and edge 5 the bottom, numbering edges 1..6
_SQ3_2 = math.sqrt(3.0) / 2.0
HEX_NORMALS = np.array(
    [
        [_SQ3_2, 0.5],
        [0.0, 1.0],
        [-_SQ3_2, 0.5],
        [-_SQ3_2, -0.5],
        [0.0, -1.0],
        [_SQ3_2, -0.5],
    ]
)


class RegionTooSmallError(ValueError):
    """Raised when n is too small for the requested cover construction."""


@dataclass(frozen=True)
class BoxSpec:
    """Box of side M*sqrt(log n) for scale n, centered at `center`."""

    n: float
    M: int = DEFAULT_M
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (np.isfinite(self.n) and self.n > 1.0):
            raise ValueError(f"box scale n must be > 1, got {self.n}")
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            raise ValueError(f"M must be an integer >= 1, got {self.M!r}")

    @property
    def side(self) -> float:
        return self.M * math.sqrt(math.log(self.n))

    def region(self) -> Region:
        s = self.side
        return Region(self.center[0] - s / 2.0, self.center[1] - s / 2.0, s)

    def half_region(self) -> Region:
        return self.region().concentric(0.5)

    def quarter_region(self) -> Region:
        return self.region().concentric(0.25)


def make_box(n: float, M: int = DEFAULT_M, center=(0.0, 0.0)) -> BoxSpec:
    return BoxSpec(float(n), int(M), tuple(center))


def sample_box(box: BoxSpec, seed: int, intensity: float = 1.0) -> PointSet:
    """Unit-intensity Poisson sample of the box (intensity overridable)."""
    return sample_poisson(box.region(), intensity, seed)


def _strictly_inside(region: Region, xy: np.ndarray) -> np.ndarray:
    return (
        (xy[:, 0] > region.origin_x)
        & (xy[:, 0] < region.origin_x + region.side)
        & (xy[:, 1] > region.origin_y)
        & (xy[:, 1] < region.origin_y + region.side)
    )


def _contained_component_labels(labels: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Labels whose every vertex satisfies `inside`."""
    if labels.size == 0:
        return np.empty(0, dtype=np.int64)
    n_labels = int(labels.max()) + 1
    total = np.bincount(labels, minlength=n_labels)
    in_count = np.bincount(labels[inside], minlength=n_labels)
    return np.flatnonzero((total > 0) & (in_count == total)).astype(np.int64)


def confined_components(ps: PointSet, k: int, graph: NeighborGraph | None = None) -> list:
    """Vertex sets of components lying strictly inside the half subsquare."""
    if len(ps) == 0:
        return []
    g = graph if graph is not None else build_knn(ps, k)
    labels = component_labels(g)
    inside = _strictly_inside(ps.region.concentric(0.5), ps.xy)
    good = _contained_component_labels(labels, inside)
    return [np.flatnonzero(labels == lab) for lab in good.tolist()]


def has_confined_component(ps: PointSet, k: int, graph: NeighborGraph | None = None) -> bool:
    """Does some component of the box k-NN graph sit strictly inside the half box?

    An empty box yields False; components touching the half-box boundary
    do not count.
    """
    return len(confined_components(ps, k, graph)) > 0


@dataclass(frozen=True)
class TileGrid:
    """(M*N)^2 congruent tiles partitioning a box; per-tile point counts."""

    box: BoxSpec
    N: int
    counts: np.ndarray  # (M*N, M*N), [ix, iy]

    @property
    def tiles_per_side(self) -> int:
        return self.box.M * self.N

    @property
    def tile_side(self) -> float:
        return self.box.side / self.tiles_per_side

    def tile_region(self, ix: int, iy: int) -> Region:
        r = self.box.region()
        t = self.tile_side
        return Region(r.origin_x + ix * t, r.origin_y + iy * t, t)


def build_tiles(ps: PointSet, box: BoxSpec, N: int = DEFAULT_N) -> TileGrid:
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ValueError(f"N must be an integer >= 1, got {N!r}")
    t = box.M * int(N)
    r = box.region()
    m = len(ps)
    if m:
        tile = r.side / t
        ix = np.clip(((ps.x - r.origin_x) / tile).astype(np.int64), 0, t - 1)
        iy = np.clip(((ps.y - r.origin_y) / tile).astype(np.int64), 0, t - 1)
        counts = np.bincount(ix * t + iy, minlength=t * t).reshape(t, t)
    else:
        counts = np.zeros((t, t), dtype=np.int64)
    if int(counts.sum()) != m:
        raise AssertionError("tile counts must sum to the box population")
    return TileGrid(box, int(N), counts)


@dataclass(frozen=True)
class DenseTileEvent:
    """Tiles overfull relative to their mean load, given the event occurred."""

    occurred: bool
    dense: frozenset  # tiles with count > (1 + eta) log n / N^2
    dense_half: frozenset  # tiles with count > (1 + eta/2) log n / N^2
    threshold: float
    threshold_half: float
    max_tile_count: int


def confined_dense_tiles(
    ps: PointSet,
    box: BoxSpec,
    k: int,
    N: int = DEFAULT_N,
    eta: float = DEFAULT_ETA,
    graph: NeighborGraph | None = None,
) -> DenseTileEvent:
    """Joint event: obstruction plus an overfull tile (and its half-eta variant)."""
    if not (0.0 < eta <= 0.5):
        raise ValueError(f"eta must lie in (0, 1/2], got {eta}")
    tiles = build_tiles(ps, box, N)
    mean_load = math.log(box.n) / (int(N) ** 2)
    thr = (1.0 + eta) * mean_load
    thr_half = (1.0 + eta / 2.0) * mean_load
    max_count = int(tiles.counts.max()) if tiles.counts.size else 0
    if not has_confined_component(ps, k, graph):
        return DenseTileEvent(False, frozenset(), frozenset(), thr, thr_half, max_count)
    dense = frozenset(map(tuple, np.argwhere(tiles.counts > thr).tolist()))
    dense_half = frozenset(map(tuple, np.argwhere(tiles.counts > thr_half).tolist()))
    return DenseTileEvent(True, dense, dense_half, thr, thr_half, max_count)


@dataclass(frozen=True)
class Cover:
    """Congruent box cover of the inner lattice zone T_n of a global sample."""

    kind: str  # "independent" or "dominating"
    n: float
    M: int
    side: float  # box side, M sqrt(log n)
    origins: np.ndarray  # (B, 2) lower-left corners
    t_lo: float  # T_n = [t_lo, t_hi]^2
    t_hi: float

    def __len__(self) -> int:
        return self.origins.shape[0]

    def box_region(self, i: int) -> Region:
        return Region(float(self.origins[i, 0]), float(self.origins[i, 1]), self.side)

    def quarter_region(self, i: int) -> Region:
        return self.box_region(i).concentric(0.25)


def build_covers(n: float, M: int = DEFAULT_M) -> tuple[Cover, Cover]:
    """Independent and dominating covers for the inner zone of [0, sqrt(n)]^2.

    The independent cover tiles T_n = [s, (f-1)s]^2 (s the box side,
    f = floor(sqrt(n)/s)) with disjoint-interior boxes; the dominating
    cover replaces each by its sixteen quarter-step translates.  Requires
    f >= 2, else the zone is degenerate and a RegionTooSmallError is
    raised.
    """
    if not (np.isfinite(n) and n > 1.0):
        raise ValueError(f"n must be > 1, got {n}")
    if not (isinstance(M, (int, np.integer)) and M >= 1):
        raise ValueError(f"M must be an integer >= 1, got {M!r}")
    side = M * math.sqrt(math.log(n))
    f = int(math.floor(math.sqrt(n) / side))
    if f < 2:
        raise RegionTooSmallError(
            f"inner zone degenerate: floor(sqrt(n)/(M sqrt(log n))) = {f} < 2"
        )
    t_lo = side
    t_hi = (f - 1) * side
    per_side = f - 2
    base = []
    for p in range(per_side):
        for q in range(per_side):
            base.append((t_lo + p * side, t_lo + q * side))
    c1 = Cover(
        "independent",
        float(n),
        int(M),
        side,
        np.asarray(base, dtype=np.float64).reshape(len(base), 2),
        t_lo,
        t_hi,
    )
    shifts = []
    for ox, oy in base:
        for i in range(4):
            for j in range(4):
                shifts.append((ox + i * side / 4.0, oy + j * side / 4.0))
    c2 = Cover(
        "dominating",
        float(n),
        int(M),
        side,
        np.asarray(shifts, dtype=np.float64).reshape(len(shifts), 2),
        t_lo,
        t_hi,
    )
    if not len(c2) < 16.0 * n / (M * M * math.log(n)):
        raise AssertionError("dominating cover exceeds its cardinality bound")
    return c1, c2


def quarter_cover_uncovered(c2: Cover, per_side: int = 40) -> np.ndarray:
    """Lattice points of T_n missed by every quarter subsquare of the cover.

    The sixteen translates only shift up and right, so a margin of width
    3/8 box side along the lower-left edges of T_n is genuinely missed;
    everything beyond it must be covered.
    """
    xs = np.linspace(c2.t_lo, c2.t_hi, per_side)
    gx, gy = np.meshgrid(xs, xs)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    covered = np.zeros(pts.shape[0], dtype=bool)
    q = c2.side / 4.0
    for i in range(len(c2)):
        ox = c2.origins[i, 0] + 3.0 * c2.side / 8.0
        oy = c2.origins[i, 1] + 3.0 * c2.side / 8.0
        covered |= (
            (pts[:, 0] >= ox)
            & (pts[:, 0] <= ox + q)
            & (pts[:, 1] >= oy)
            & (pts[:, 1] <= oy + q)
        )
    return pts[~covered]


@dataclass(frozen=True)
class HexHull:
    """Hexagonal hull: tangent lines at directions 0, 60, 120 degrees.

    Edges are numbered 1..6 cyclically via their outward normals at
    30 + 60*(i-1) degrees; edges 2 and 5 are the horizontal top and
    bottom.  offsets[i] is the support value max over points of p.n_i;
    contact_idx[i] is the smallest input index attaining it.
    """

    offsets: np.ndarray  # (6,)
    contact_idx: np.ndarray  # (6,) indices into the input points
    vertices: np.ndarray  # (6, 2); vertex i = intersection of lines i and i+1

    @property
    def normals(self) -> np.ndarray:
        return HEX_NORMALS

    def contains(self, xy: np.ndarray, slack: float = 0.0) -> np.ndarray:
        proj = np.asarray(xy, dtype=np.float64) @ HEX_NORMALS.T
        return np.all(proj <= self.offsets + slack, axis=1)

    def edge_endpoints(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints of edge i (0-based): vertices i-1 and i."""
        return self.vertices[(i - 1) % 6], self.vertices[i]

    def edge_length(self, i: int) -> float:
        a, b = self.edge_endpoints(i)
        return float(np.hypot(*(b - a)))

    def boundary_chain(self) -> np.ndarray:
        """Closed polyline through the six vertices (first point repeated)."""
        return np.vstack([self.vertices, self.vertices[:1]])


def hex_hull(xy: np.ndarray) -> HexHull:
    """Smallest hexagon with the fixed normal fan containing the points."""
    xy = np.asarray(xy, dtype=np.float64)
    if xy.ndim != 2 or xy.shape[1] != 2 or xy.shape[0] == 0:
        raise ValueError("hex hull needs a nonempty (m, 2) point array")
    proj = xy @ HEX_NORMALS.T  # (m, 6)
    offsets = proj.max(axis=0)
    contact_idx = np.argmax(proj, axis=0).astype(np.int64)  # first max = least index
    vertices = np.empty((6, 2), dtype=np.float64)
    for i in range(6):
        n1 = HEX_NORMALS[i]
        n2 = HEX_NORMALS[(i + 1) % 6]
        det = n1[0] * n2[1] - n1[1] * n2[0]
        vertices[i, 0] = (offsets[i] * n2[1] - offsets[(i + 1) % 6] * n1[1]) / det
        vertices[i, 1] = (offsets[(i + 1) % 6] * n1[0] - offsets[i] * n2[0]) / det
    return HexHull(offsets, contact_idx, vertices)


def reflected_cap_empty(
    ps: PointSet,
    members: np.ndarray,
    g: NeighborGraph,
    hull: HexHull | None = None,
    slack: float = 1e-9,
) -> bool:
    """Check the reflected neighbourhood caps of a witness component are point-free.

    For each non-degenerate hull edge, the cap is the k-th-neighbour disc
    at the edge's contact point intersected with the hull; its mirror
    image across the edge line must contain no point of the process in
    its interior (up to `slack`).  True for every genuine witness: a
    point strictly closer than the k-th neighbour radius would be a
    neighbour of the contact vertex and hence inside the hull, while the
    open reflected cap lies outside it.  Planted points violate it.
    """
    if g.model != "knn":
        raise ValueError("reflected caps are defined for knn graphs")
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("witness component must be nonempty")
    if hull is None:
        hull = hex_hull(ps.xy[members])
    xy = ps.xy
    proj = xy @ HEX_NORMALS.T  # (m, 6)
    for i in range(6):
        a, b = hull.edge_endpoints(i)
        if float(np.hypot(*(b - a))) <= slack:
            continue  # degenerate edge, no cap
        contact_vertex = int(members[hull.contact_idx[i]])
        radius = kth_nn_radius(g, contact_vertex)
        cx, cy = xy[contact_vertex]
        t = proj[:, i] - hull.offsets[i]  # signed excess across the edge line
        beyond = t > slack
        if not beyond.any():
            continue
        d = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy)
        candidate = beyond & (d < radius - slack)
        if not candidate.any():
            continue
        # reflect across the edge line and require strict hull membership
        refl = xy[candidate] - 2.0 * t[candidate, None] * HEX_NORMALS[i]
        inside = np.all(refl @ HEX_NORMALS.T < hull.offsets - slack, axis=1)
        if inside.any():
            return False
    return True


@dataclass(frozen=True)
class TileWalk:
    count: int
    bound: float
    length: float
    cells: frozenset


def tiles_met_by_polyline(chain_xy: np.ndarray, tiles: TileGrid) -> TileWalk:
    """Exact count of tiles met by a closed polyline, with the 9 l / t bound.

    The chain must be closed (first point equal to last).  The bound
    9 * length / tile_side is asserted whenever length >= tile_side; a
    closed curve shorter than one tile side still meets at least one
    tile, so the bound cannot apply below that scale.
    """
    chain = np.asarray(chain_xy, dtype=np.float64)
    if chain.ndim != 2 or chain.shape[1] != 2 or chain.shape[0] < 2:
        raise ValueError("polyline must be an (n, 2) array with n >= 2")
    if not np.array_equal(chain[0], chain[-1]):
        raise ValueError("polyline must be closed: first and last points equal")
    r = tiles.box.region()
    t = tiles.tile_side
    nper = tiles.tiles_per_side
    cells: set = set()
    length = 0.0
    for p, q in zip(chain[:-1], chain[1:]):
        length += float(np.hypot(q[0] - p[0], q[1] - p[1]))
        cells |= geometry.segment_cells(p, q, r.origin_x, r.origin_y, t, nper, nper)
    bound = 9.0 * length / t
    count = len(cells)
    if length >= t and count > bound:
        raise AssertionError("tile count exceeded the length bound; walk is broken")
    return TileWalk(count, bound, length, frozenset(cells))


@dataclass(frozen=True)
class BoxCheck:
    """Outcome of the locality test on one cover box."""

    box_index: int
    origin: tuple
    population: int
    local_longest: float
    hypotheses_hold: bool
    event_occurs: bool
    conclusion_holds: bool  # global graph has a component inside the half box


@dataclass(frozen=True)
class LocalityReport:
    global_longest: float
    global_edge_bound: float
    local_edge_bound: float
    global_hypothesis_holds: bool
    boxes: tuple
    violations: tuple  # BoxChecks where hypotheses + event hold but conclusion fails


def locality_check(
    ps_global: PointSet,
    k: int,
    cover: Cover,
    graph: NeighborGraph | None = None,
    labels: np.ndarray | None = None,
) -> LocalityReport:
    """Deterministic box-locality test over a cover of the inner zone.

    Hypotheses per box: the global graph has no edge above
    M sqrt(log n)/16, the box graph none above M sqrt(log n)/8, and the
    obstruction event holds in the box.  Conclusion: the global graph has
    a component strictly inside the box's half subsquare.  Returns every
    box outcome plus the subset violating the implication (provably
    empty).
    """
    g = graph if graph is not None else build_knn(ps_global, k)
    labs = labels if labels is not None else component_labels(g)
    root = math.sqrt(math.log(cover.n))
    global_bound = cover.M * root / 16.0
    local_bound = cover.M * root / 8.0
    global_longest = longest_edge(g)
    global_ok = global_longest <= global_bound
    checks = []
    violations = []
    for b in range(len(cover)):
        region = cover.box_region(b)
        mask = region.contains(ps_global.x, ps_global.y)
        pts = ps_global.xy[mask]
        local_ps = PointSet(region, pts, ps_global.seed)
        local_g = build_knn(local_ps, k) if len(local_ps) else None
        local_longest = longest_edge(local_g) if local_g is not None else 0.0
        event = has_confined_component(local_ps, k, local_g) if len(local_ps) else False
        hyp = global_ok and local_longest <= local_bound
        half = region.concentric(0.5)
        inside_half = _strictly_inside(half, ps_global.xy)
        conclusion = _contained_component_labels(labs, inside_half).size > 0
        check = BoxCheck(
            b,
            (float(region.origin_x), float(region.origin_y)),
            int(mask.sum()),
            local_longest,
            bool(hyp),
            bool(event),
            bool(conclusion),
        )
        checks.append(check)
        if hyp and event and not conclusion:
            violations.append(check)
    return LocalityReport(
        global_longest,
        global_bound,
        local_bound,
        bool(global_ok),
        tuple(checks),
        tuple(violations),
    )


@dataclass(frozen=True)
class SmallComponentRow:
    size: int
    diameter: float
    bounding_box: tuple
    inside_inner_zone: bool


def small_components_report(
    ps_global: PointSet,
    k: int,
    n: float,
    M: int = DEFAULT_M,
    graph: NeighborGraph | None = None,
) -> tuple:
    """Global components of diameter below M sqrt(log n)/16, with zone flags."""
    from .analysis import connected_components

    g = graph if graph is not None else build_knn(ps_global, k)
    decomp = connected_components(g)
    side = M * math.sqrt(math.log(n))
    f = math.floor(math.sqrt(n) / side)
    t_lo, t_hi = side, (f - 1) * side
    zone_ok = f >= 2
    bound = side / 16.0
    rows = []
    for c in range(decomp.count):
        if decomp.diameters[c] >= bound:
            continue
        x0, y0, x1, y1 = decomp.bounding_boxes[c]
        inside = bool(
            zone_ok and x0 >= t_lo and y0 >= t_lo and x1 <= t_hi and y1 <= t_hi
        )
        rows.append(
            SmallComponentRow(
                int(decomp.sizes[c]), float(decomp.diameters[c]), (x0, y0, x1, y1), inside
            )
        )
    return tuple(rows)
