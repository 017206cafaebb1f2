"""Deterministic invariant suites behind the `selfcheck` subcommand.

Each suite replays fixed-seed scenarios and verifies a property the
library's correctness argument leans on: neighbour-set nesting in k,
the point-deletion coupling, obstruction-event nesting, hexagon hull
tangency, the curve-tile bound, exact connectivity against a brute
subset oracle, threshold monotonicity, closed-form constants, and
generator reproducibility.  Everything is seeded, so a failure is a
defect, never statistical bad luck.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .analysis import is_connected, is_s_connected, vertex_connectivity
from .constants import (
    decay_step,
    fault_tolerance_increment,
    prescribed_tile_count,
    sharpness_coefficient,
    threshold_constant_band,
)
from .experiments import sample_threshold_k, threshold_profile
from .knn import build_gilbert, build_knn, restrict_k
from .local_events import (
    build_covers,
    build_tiles,
    confined_components,
    confined_dense_tiles,
    hex_hull,
    locality_check,
    make_box,
    reflected_cap_empty,
    sample_box,
    tiles_met_by_polyline,
)
from .points import Region, delete_points, sample_fixed, sample_poisson
from .rng import Stream, derive_key, poisson_count


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _edge_set(g) -> set:
    eu, ev = g.undirected_edges()
    return set(zip(eu.tolist(), ev.tolist()))


def _check_rng_streams() -> CheckResult:
    a = Stream(12345).uniforms(64)
    b = Stream(12345).uniforms(64)
    if not np.array_equal(a, b):
        return CheckResult("rng-reproducible", False, "same seed produced different uniforms")
    s = Stream(12345)
    scalar = np.array([s.uniform() for _ in range(64)])
    if not np.array_equal(a, scalar):
        return CheckResult("rng-reproducible", False, "block and scalar uniforms disagree")
    if not ((a >= 0.0).all() and (a < 1.0).all()):
        return CheckResult("rng-reproducible", False, "uniforms left [0, 1)")
    if derive_key(1, 2) == derive_key(2, 1):
        return CheckResult("rng-reproducible", False, "derive_key is argument-order symmetric")
    counts = [poisson_count(200.0, Stream(derive_key(9, i))) for i in range(3)]
    again = [poisson_count(200.0, Stream(derive_key(9, i))) for i in range(3)]
    if counts != again:
        return CheckResult("rng-reproducible", False, "poisson counts not reproducible")
    return CheckResult("rng-reproducible", True, "64 uniforms, scalar path, 3 poisson draws")


def _check_edge_nesting() -> CheckResult:
    region = Region(0.0, 0.0, 16.0)
    checked = 0
    for seed in (11, 12, 13, 14, 15):
        ps = sample_poisson(region, 1.0, seed)
        if len(ps) < 3:
            continue
        kmax = min(9, len(ps) - 1)
        g = build_knn(ps, kmax)
        prev: set = set()
        for k in range(1, kmax + 1):
            cur = _edge_set(restrict_k(g, k))
            if not prev <= cur:
                return CheckResult("edge-nesting", False, f"seed {seed}: k={k} lost edges")
            prev = cur
            checked += 1
    return CheckResult("edge-nesting", True, f"{checked} nested edge sets")


def _check_deletion_inclusion() -> CheckResult:
    region = Region(0.0, 0.0, 12.0)
    cases = 0
    for seed in range(20):
        ps = sample_fixed(region, 60, derive_key(77, seed))
        keep_l = 1 + seed % 4
        victims = np.arange(len(ps) - keep_l, len(ps))
        reduced = delete_points(ps, victims)
        survivors = np.delete(np.arange(len(ps)), victims)
        for k in (1, 2, 4):
            small = _edge_set(build_knn(reduced, k))
            mapped = {(int(min(survivors[a], survivors[b])), int(max(survivors[a], survivors[b]))) for a, b in small}
            big = _edge_set(build_knn(ps, k + keep_l))
            if not mapped <= big:
                return CheckResult("deletion-inclusion", False, f"seed {seed}, k={k}, L={keep_l}")
            cases += 1
    return CheckResult("deletion-inclusion", True, f"{cases} deletion couplings")


def _check_event_nesting() -> CheckResult:
    box = make_box(math.exp(3.0), 15)
    trials = 0
    occurred = 0
    for seed in range(40):
        ps = sample_box(box, derive_key(5150, seed))
        if len(ps) < 2:
            continue
        g = build_knn(ps, min(8, len(ps) - 1))
        occ = [len(confined_components(ps, k, restrict_k(g, k))) > 0 for k in range(1, min(8, len(ps) - 1) + 1)]
        trials += 1
        occurred += int(any(occ))
        # once the obstruction is gone it must stay gone for larger k
        for k0 in range(len(occ) - 1):
            if occ[k0 + 1] and not occ[k0]:
                return CheckResult("event-nesting", False, f"seed {seed}: event at k={k0 + 2} but not k={k0 + 1}")
        ev = confined_dense_tiles(ps, box, 1, N=2, eta=0.5, graph=restrict_k(g, 1))
        if not ev.dense <= ev.dense_half:
            return CheckResult("event-nesting", False, f"seed {seed}: dense set not within half-eta set")
    if occurred == 0:
        return CheckResult("event-nesting", False, "calibration drift: no obstruction events at all")
    return CheckResult("event-nesting", True, f"{trials} boxes, {occurred} with events, all nested")


def _check_hull_geometry() -> CheckResult:
    rng_seeds = range(30)
    tested = 0
    for seed in rng_seeds:
        s = Stream(derive_key(31337, seed))
        m = 1 + seed % 7
        xy = s.uniforms(2 * m).reshape(m, 2) * 3.0
        hull = hex_hull(xy)
        if not hull.contains(xy, slack=1e-9).all():
            return CheckResult("hull-geometry", False, f"seed {seed}: member outside own hull")
        proj = xy @ hull.normals.T
        for i in range(6):
            c = hull.contact_idx[i]
            if abs(proj[c, i] - hull.offsets[i]) > 1e-9:
                return CheckResult("hull-geometry", False, f"seed {seed}: contact {i} off its line")
            a, b = hull.edge_endpoints(i)
            for p in (a, b):
                if not (p @ hull.normals[i] <= hull.offsets[i] + 1e-7):
                    return CheckResult("hull-geometry", False, f"seed {seed}: vertex beyond edge line {i}")
        chain = hull.boundary_chain()
        if not np.array_equal(chain[0], chain[-1]) or chain.shape != (7, 2):
            return CheckResult("hull-geometry", False, f"seed {seed}: boundary chain not closed")
        tested += 1
    return CheckResult("hull-geometry", True, f"{tested} hulls, tangency and containment hold")


def _check_reflected_caps() -> CheckResult:
    box = make_box(math.exp(3.0), 15)
    witnesses = 0
    seed = 0
    while witnesses < 12 and seed < 400:
        ps = sample_box(box, derive_key(424242, seed))
        seed += 1
        if len(ps) < 3:
            continue
        g = build_knn(ps, 2)
        for members in confined_components(ps, 2, g):
            if not reflected_cap_empty(ps, members, g):
                return CheckResult("reflected-caps", False, f"witness at seed {seed - 1} has an occupied cap")
            witnesses += 1
    if witnesses < 12:
        return CheckResult("reflected-caps", False, f"only {witnesses} witnesses found; calibration drift")
    return CheckResult("reflected-caps", True, f"{witnesses} witnesses, every reflected cap empty")


def _check_tile_walk() -> CheckResult:
    box = make_box(math.exp(3.0), 15)
    ps = sample_box(box, derive_key(708, 3))
    tiles = build_tiles(ps, box, N=4)
    walks = 0
    for seed in range(10):
        s = Stream(derive_key(708, 100 + seed))
        cx, cy = (s.uniforms(2) - 0.5) * box.side * 0.5
        r = 0.05 + 0.4 * s.uniform()
        th = np.linspace(0.0, 2.0 * math.pi, 40)
        ring = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
        ring[-1] = ring[0]
        walk = tiles_met_by_polyline(ring, tiles)
        if walk.count < 1:
            return CheckResult("tile-walk", False, f"seed {seed}: closed loop met no tile")
        if walk.length >= tiles.tile_side and walk.count > walk.bound:
            return CheckResult("tile-walk", False, f"seed {seed}: count beat the length bound")
        walks += 1
    return CheckResult("tile-walk", True, f"{walks} loops within the length bound")


def _brute_kappa(m: int, edges: set) -> int:
    adj = {u: set() for u in range(m)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)

    def connected_after(removed: set) -> bool:
        rest = [u for u in range(m) if u not in removed]
        if len(rest) <= 1:
            return True
        seen = {rest[0]}
        stack = [rest[0]]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in removed and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(rest)

    for c in range(0, m - 1):
        for cut in itertools.combinations(range(m), c):
            if not connected_after(set(cut)):
                return c
    return m - 1


def _check_connectivity_oracle() -> CheckResult:
    region = Region(0.0, 0.0, 3.0)
    graphs = 0
    for seed in range(25):
        ps = sample_fixed(region, 4 + seed % 5, derive_key(2718, seed))
        for r in (0.8, 1.3, 2.0):
            g = build_gilbert(ps, r)
            want = _brute_kappa(len(ps), _edge_set(g))
            got = vertex_connectivity(g)
            if got != want:
                return CheckResult("connectivity-oracle", False, f"seed {seed} r={r}: {got} != {want}")
            for s in (1, 2, 3):
                if is_s_connected(g, s) != (len(ps) > s and want >= s):
                    return CheckResult("connectivity-oracle", False, f"seed {seed} r={r}: s={s} verdict wrong")
            graphs += 1
    return CheckResult("connectivity-oracle", True, f"{graphs} graphs match the subset oracle")


def _check_threshold_monotone() -> CheckResult:
    region = Region(0.0, 0.0, 16.0)
    profiles = 0
    for seed in (3, 4, 5):
        ps = sample_poisson(region, 1.0, seed)
        if len(ps) < 5:
            continue
        prof = threshold_profile(ps, 3)
        if not (np.diff(prof) >= 0).all():
            return CheckResult("threshold-monotone", False, f"seed {seed}: profile {prof.tolist()} decreases")
        if prof[0] != sample_threshold_k(ps):
            return CheckResult("threshold-monotone", False, f"seed {seed}: profile start != threshold search")
        if not is_connected(build_knn(ps, int(prof[0]))):
            return CheckResult("threshold-monotone", False, f"seed {seed}: graph at threshold not connected")
        if prof[0] > 1 and is_connected(build_knn(ps, int(prof[0]) - 1)):
            return CheckResult("threshold-monotone", False, f"seed {seed}: threshold not minimal")
        profiles += 1
    return CheckResult("threshold-monotone", True, f"{profiles} profiles non-decreasing and minimal")


def _check_constants() -> CheckResult:
    if decay_step(30, 25450, 0.5) != 131:
        return CheckResult("constants", False, "decay step at (30, 25450, 0.5) is not 131")
    if prescribed_tile_count(30) != 25450:
        return CheckResult("constants", False, "prescribed tile count at M=30 is not 25450")
    lo, hi = threshold_constant_band()
    if not 0.0 < lo < hi < 1.0:
        return CheckResult("constants", False, "threshold band out of order")
    c = sharpness_coefficient(30, 25450, 0.5)
    if not math.isclose(c, (2.0 + 6.0 / math.log(2.0)) * 131, rel_tol=1e-12):
        return CheckResult("constants", False, "sharpness coefficient inconsistent with decay step")
    inc = [fault_tolerance_increment(s, 2.0**16, 30, 25450, 0.5) for s in (1, 2, 3)]
    if not (inc[0] < inc[1] < inc[2]):
        return CheckResult("constants", False, "fault-tolerance increment not increasing in s")
    return CheckResult("constants", True, f"L=131, C={c:.3f}, increments {inc}")


def _check_locality() -> CheckResult:
    n = 1600.0
    _, c2 = build_covers(n, 2)
    boxes = 0
    for seed in (21, 22):
        ps = sample_poisson(Region(0.0, 0.0, math.sqrt(n)), 1.0, seed)
        report = locality_check(ps, 1, c2)
        if report.violations:
            return CheckResult("locality", False, f"seed {seed}: {len(report.violations)} violations")
        boxes += len(report.boxes)
    return CheckResult("locality", True, f"{boxes} cover boxes, no violations")


_CHECKS = (
    _check_rng_streams,
    _check_edge_nesting,
    _check_deletion_inclusion,
    _check_event_nesting,
    _check_hull_geometry,
    _check_reflected_caps,
    _check_tile_walk,
    _check_connectivity_oracle,
    _check_threshold_monotone,
    _check_constants,
    _check_locality,
)


def run_all() -> list[CheckResult]:
    """Run every suite; a list of CheckResult in declaration order."""
    return [check() for check in _CHECKS]
