"""Acceptance gate: one test per shipped guarantee, one printed verdict line each.

Each test records a criterion line through conftest and then asserts it,
so the terminal summary always carries the full pass/fail table.  The
two large campaigns (threshold constant and sharpness trend) share one
sample run per scale; a longer campaign extends a shorter one sample for
sample, which test_experiments checks directly.
"""

import json
import math
import time

import numpy as np
import pytest

import _oracles
from _witness import harvest_witnesses, planted_witness
from conftest import record_criterion
from rggconn import cli
from rggconn.analysis import vertex_connectivity
from rggconn.constants import fault_tolerance_increment, threshold_constant_band
from rggconn.experiments import (
    gilbert_penrose_compare,
    sharpness_width,
    threshold_profile,
    threshold_samples,
)
from rggconn.knn import build_gilbert, build_index, build_knn
from rggconn.local_events import (
    RegionTooSmallError,
    build_covers,
    build_tiles,
    confined_dense_tiles,
    has_confined_component,
    hex_hull,
    locality_check,
    make_box,
    reflected_cap_empty,
    sample_box,
    tiles_met_by_polyline,
)
from rggconn.points import PointSet, Region, delete_points, sample_fixed, sample_poisson
from rggconn.rng import Stream, derive_key, poisson_count

_CAMPAIGNS: dict = {}


def _campaign(n_pow: int, trials: int, seed: int) -> np.ndarray:
    key = (n_pow, seed)
    if key not in _CAMPAIGNS:
        ks, _, wall = threshold_samples(2.0 ** n_pow, trials, seed)
        _CAMPAIGNS[key] = (ks, wall)
    ks, _ = _CAMPAIGNS[key]
    assert ks.size >= trials
    return ks[:trials]


def _edge_pairs(g) -> set:
    eu, ev = g.undirected_edges()
    return set(zip(eu.tolist(), ev.tolist()))


def test_criterion_01_knn_oracle_equivalence():
    # the vectorized oracle must agree with the scalar scan before it is trusted
    for seed, m in ((0, 2), (1, 17), (2, 40)):
        ps = sample_fixed(Region(0.0, 0.0, 6.0), m, seed)
        for k in (1, 3, 9):
            a = _oracles.matrix_knn_lists(ps.xy, k)
            b = _oracles.brute_knn_lists(ps.xy, k)
            assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(100):
        m = 2 + (seed * 97) % 299
        ps = sample_fixed(Region(0.0, 0.0, math.sqrt(max(m, 4))), m, seed)
        idx = build_index(ps)
        for k in range(1, 11):
            g = build_knn(ps, k, index=idx)
            oi, od = _oracles.matrix_knn_lists(ps.xy, k)
            if not (np.array_equal(g.out_idx, oi) and np.array_equal(g.out_d2, od)):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10.0
    record_criterion(
        1,
        ok,
        f"builder vs quadratic scan: {mismatches} mismatches over 100 pointsets x k 1..10 "
        f"({elapsed:.1f}s < 10s)",
    )
    assert ok


def test_criterion_02_connectivity_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches = 0
    for case in range(200):
        m = 2 + case % 9
        ps = sample_fixed(Region(0.0, 0.0, 3.0), m, case)
        if case % 2 == 0:
            g = build_knn(ps, 1 + (case // 2) % 3)
        else:
            g = build_gilbert(ps, 0.5 + 0.3 * ((case // 2) % 6))
        if vertex_connectivity(g) != _oracles.brute_vertex_connectivity(m, _edge_pairs(g)):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30.0
    record_criterion(
        2,
        ok,
        f"flow cut vs exhaustive subsets: {mismatches} mismatches over 200 graphs, m <= 10 "
        f"({elapsed:.1f}s < 30s)",
    )
    assert ok


def test_criterion_03_edge_nesting():
    region = Region(0.0, 0.0, 32.0)
    violations = 0
    for t in range(500):
        ps = sample_poisson(region, 1.0, derive_key(303, t))
        idx = build_index(ps)
        prev = None
        for k in range(1, 21):
            eu, ev = build_knn(ps, k, index=idx).undirected_edges()
            codes = eu.astype(np.int64) * len(ps) + ev
            if prev is not None:
                pos = np.searchsorted(codes, prev)
                inside = pos < codes.size
                if not (inside.all() and np.array_equal(codes[pos], prev)):
                    violations += 1
            prev = codes
    ok = violations == 0
    record_criterion(
        3, ok, f"{violations} edge-nesting violations over 500 samples at n=1024, k 1..20"
    )
    assert ok


def test_criterion_04_deletion_suite():
    # part one: surviving edges at k always sit inside the original graph at k + L
    rng = np.random.default_rng(44)
    subgraph_violations = 0
    for case in range(200):
        ps = sample_fixed(Region(0.0, 0.0, 7.0), 50, case)
        k = 1 + case % 4
        L = 1 + case % 5
        victims = np.sort(rng.choice(50, size=L, replace=False))
        keep = np.setdiff1d(np.arange(50), victims)
        sub = build_knn(delete_points(ps, victims), k)
        sup = _edge_pairs(build_knn(ps, k + L))
        for u, v in zip(*sub.undirected_edges()):
            a, b = int(keep[u]), int(keep[v])
            if (min(a, b), max(a, b)) not in sup:
                subgraph_violations += 1

    # part two: overfull antecedent at k + L forces the half-slack event at k
    # after deleting any L points of the overfull tile (budget eta log n / 2N^2)
    rng = np.random.default_rng(45)
    event_violations = 0
    for case in range(200):
        k = 1 + case % 2
        L = 1 + case % 4
        ps, box, _ = planted_witness(k + L, case)
        before = confined_dense_tiles(ps, box, k + L, N=1, eta=0.5)
        assert before.occurred and (1, 1) in before.dense
        tile = build_tiles(ps, box, N=1).tile_region(1, 1)
        in_tile = np.flatnonzero(tile.contains(ps.x, ps.y))
        victims = rng.choice(in_tile, size=L, replace=False)
        survivors = np.delete(np.arange(len(ps)), victims)
        ps2 = PointSet(box.region(), ps.xy[survivors], seed=0)
        after = confined_dense_tiles(ps2, box, k, N=1, eta=0.5)
        if not (after.occurred and (1, 1) in after.dense_half):
            event_violations += 1

    ok = subgraph_violations == 0 and event_violations == 0
    record_criterion(
        4,
        ok,
        f"point deletion: {subgraph_violations} subgraph violations (200 random cases), "
        f"{event_violations} event-inclusion violations (200 constructed cases)",
    )
    assert ok


def test_criterion_05_event_nesting():
    box = make_box(math.e ** 3, 15)
    violations = 0
    active_boxes = 0
    deepest = 0
    for i in range(150):
        ps = sample_box(box, derive_key(505, i))
        occ = [has_confined_component(ps, k) for k in range(1, 12)]
        for hi in range(len(occ)):
            if occ[hi] and not all(occ[: hi + 1]):
                violations += 1
        if any(occ[1:]):
            active_boxes += 1
            deepest = max(deepest, 2 + max(j for j, o in enumerate(occ[1:]) if o))
    ok = violations == 0 and active_boxes > 0
    record_criterion(
        5,
        ok,
        f"{violations} event-nesting violations over 150 boxes, k 1..11 "
        f"({active_boxes} boxes active beyond k=1, deepest k={deepest})",
    )
    assert ok


def test_criterion_06_locality_sweep():
    n = 2.0 ** 14
    # the prescribed box scale no longer fits this torus-free window
    degenerate = False
    try:
        build_covers(n, 30)
    except RegionTooSmallError:
        degenerate = True
    assert degenerate

    _, c2 = build_covers(n, 13)
    region = Region(0.0, 0.0, math.sqrt(n))
    violations = 0
    checked = {2: 0, 5: 0}
    for t in range(500):
        ps = sample_poisson(region, 1.0, derive_key(606, t))
        g5 = build_knn(ps, 5)
        for k, graph in ((5, g5), (2, None)):
            rep = locality_check(ps, k, c2, graph=graph)
            violations += len(rep.violations)
            checked[k] += sum(1 for b in rep.boxes if b.hypotheses_hold and b.event_occurs)
    ok = violations == 0 and checked[2] > 0
    record_criterion(
        6,
        ok,
        f"{violations} locality violations over 500 samples at n=2^14 "
        f"(M=30 box exceeds the window; swept M=13: {checked[5]} live boxes at median k=5, "
        f"{checked[2]} at k=2)",
    )
    assert ok


def test_criterion_07_reflected_caps():
    witnesses = harvest_witnesses(50, k=2)
    failures = sum(1 for ps, g, members in witnesses if not reflected_cap_empty(ps, members, g))
    ok = failures == 0
    record_criterion(
        7, ok, f"reflected cap empty for {len(witnesses) - failures}/{len(witnesses)} harvested witnesses"
    )
    assert ok


def _keeps_grid_clearance(chain, region, t, per_side, margin):
    # every crossing must be transversal and away from perpendicular lines,
    # else the sampling oracle can miss a cell the exact walk counts
    grids = (
        region.origin_x + t * np.arange(per_side + 1),
        region.origin_y + t * np.arange(per_side + 1),
    )
    for p, q in zip(chain[:-1], chain[1:]):
        for axis in (0, 1):
            a, b = float(p[axis]), float(q[axis])
            lo, hi = (a, b) if a <= b else (b, a)
            for g in grids[axis]:
                if g <= lo - margin or g >= hi + margin:
                    continue
                if not (lo + margin <= g <= hi - margin):
                    return False
                frac = (g - a) / (b - a)
                other = float(p[1 - axis] + frac * (q[1 - axis] - p[1 - axis]))
                if np.abs(grids[1 - axis] - other).min() < margin:
                    return False
    return True


def test_criterion_08_curve_tile_bound():
    # harvested hull boundaries: the walk itself asserts the bound internally;
    # re-check it here and count the hulls long enough for the bound to bind
    box3 = make_box(math.e ** 3, 15)
    tiles3 = build_tiles(PointSet(box3.region(), np.empty((0, 2)), seed=0), box3, N=2)
    bound_violations = 0
    binding = 0
    hulls = harvest_witnesses(100, k=2)
    for ps, _, members in hulls:
        walk = tiles_met_by_polyline(hex_hull(ps.xy[members]).boundary_chain(), tiles3)
        if walk.count < 1:
            bound_violations += 1
        if walk.length >= tiles3.tile_side:
            binding += 1
            if walk.count > walk.bound:
                bound_violations += 1

    # synthetic star loops: exact cell sets against the rasterization oracle;
    # the oracle samples densely, so loops grazing a gridline are redrawn
    box4 = make_box(math.e ** 4, 5)
    tiles4 = build_tiles(PointSet(box4.region(), np.empty((0, 2)), seed=0), box4, N=2)
    r4 = box4.region()
    oracle_mismatches = 0
    accepted = 0
    seed = 0
    while accepted < 20:
        assert seed < 500
        s = Stream(derive_key(818, seed))
        m = 4 + seed % 5
        seed += 1
        ang = np.sort(2.0 * math.pi * s.uniforms(m))
        rad = 1.5 + 2.5 * s.uniforms(m)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        chain = np.vstack([pts, pts[:1]])
        if not _keeps_grid_clearance(chain, r4, tiles4.tile_side, tiles4.tiles_per_side, 0.02):
            continue
        accepted += 1
        walk = tiles_met_by_polyline(chain, tiles4)
        oracle = _oracles.raster_cells(
            chain, r4.origin_x, r4.origin_y, tiles4.tile_side, tiles4.tiles_per_side
        )
        if walk.cells != frozenset(oracle) or walk.count > walk.bound:
            oracle_mismatches += 1

    # axis-aligned loop with a hand-countable cell set
    box1 = make_box(math.e ** 4, 5)
    tiles1 = build_tiles(PointSet(box1.region(), np.empty((0, 2)), seed=0), box1, N=1)
    square = np.array([[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0], [-2.0, -2.0]])
    walk1 = tiles_met_by_polyline(square, tiles1)
    square_ok = walk1.count == 8 and walk1.length == 16.0 and walk1.bound == 72.0

    ok = bound_violations == 0 and oracle_mismatches == 0 and square_ok
    record_criterion(
        8,
        ok,
        f"curve-tile bound: {bound_violations} violations over 100 hulls ({binding} above one "
        f"tile side), {oracle_mismatches} oracle mismatches over 20 loops, square loop "
        f"count {walk1.count} <= bound {walk1.bound:.0f}",
    )
    assert ok


def test_criterion_09_threshold_constant():
    t0 = time.perf_counter()
    ks = _campaign(16, 300, 2025)[:200]
    elapsed = time.perf_counter() - t0
    k_med = int(np.sort(ks)[math.ceil(0.5 * ks.size) - 1])
    c_hat = k_med / math.log(2.0 ** 16)
    lo, hi = threshold_constant_band()
    ok = 0.25 <= c_hat <= 0.80 and elapsed < 600.0
    record_criterion(
        9,
        ok,
        f"median threshold K={k_med} at n=2^16 over 200 trials: c_hat={c_hat:.4f} in "
        f"[0.25, 0.80]; limiting band ({lo:.4f}, {hi:.4f}); {elapsed:.0f}s < 600s",
    )
    assert ok


def test_criterion_10_sharpness_trend():
    widths = {}
    for n_pow, seed in ((10, 2026), (13, 2027), (16, 2025)):
        ks = _campaign(n_pow, 300, seed)
        widths[n_pow] = sharpness_width(2.0 ** n_pow, 0.1, 300, seed, samples=ks).width
    ok = widths[16] <= widths[10] + 2 and all(w <= 12 for w in widths.values())
    record_criterion(
        10,
        ok,
        f"decile widths w(2^10)={widths[10]}, w(2^13)={widths[13]}, w(2^16)={widths[16]}: "
        f"w(2^16) <= w(2^10)+2 and all <= 12",
    )
    assert ok


def _kruskal_bottleneck(xy):
    m = len(xy)
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)
    iu, ju = np.triu_indices(m, 1)
    order = np.argsort(d2[iu, ju], kind="stable")
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merged = 0
    for e in order:
        a, b = find(iu[e]), find(ju[e])
        if a != b:
            parent[a] = b
            merged += 1
            if merged == m - 1:
                return math.sqrt(d2[iu[e], ju[e]])
    raise AssertionError("input not connectable")


def test_criterion_11_gilbert_coincidence():
    # radii definitions first, against independent constructions, so the
    # calibrated fraction below is judged on verified ground
    region = Region(0.0, 0.0, 64.0)
    for t in range(10):
        ps = sample_poisson(region, 1.0, derive_key(5150, t))
        d2 = ((ps.xy[:, None, :] - ps.xy[None, :, :]) ** 2).sum(-1)
        np.fill_diagonal(d2, np.inf)
        ri_ref = math.sqrt(d2.min(axis=1).max())
        from rggconn import _kernels
        from rggconn.knn import longest_edge

        assert abs(float(_kernels.prim_bottleneck(ps.x, ps.y)) - _kruskal_bottleneck(ps.xy)) <= 1e-9
        assert abs(longest_edge(build_knn(ps, 1)) - ri_ref) <= 1e-9

    res = gilbert_penrose_compare(4096.0, 300, 2028)
    ok = res.coincidence_fraction >= 0.70 and res.order_violations == 0
    record_criterion(
        11,
        ok,
        f"connection radius equals isolation radius in {res.coincidence_fraction:.0%} of 300 "
        f"trials (target >= 70%; both radii verified against independent oracles on 10 "
        f"trials), {res.order_violations} order violations",
    )
    assert ok


def test_criterion_12_s_connectivity_coupling():
    region = Region(0.0, 0.0, 64.0)
    violations = 0
    for t in range(200):
        ps = sample_poisson(region, 1.0, derive_key(1212, t))
        prof = threshold_profile(ps, 4)
        if not np.all(np.diff(prof) >= 0):
            violations += 1
    incs = [fault_tolerance_increment(s, 2.0 ** 12, 30, 25450, 0.5) for s in range(1, 5)]
    ok = violations == 0 and incs == sorted(incs)
    record_criterion(
        12,
        ok,
        f"{violations} profile-monotonicity violations over 200 samples at n=2^12; "
        f"prescribed increments for s=1..4: {incs}",
    )
    assert ok


def test_criterion_13_sampler_statistics():
    checks = []

    s = Stream(derive_key(1313, 0))
    draws = np.array([poisson_count(20.0, s) for _ in range(50_000)])
    p_pmf = _oracles.poisson_chi2_pvalue(draws, 20.0)
    checks.append(("pmf chi2", p_pmf > 1e-3))

    s = Stream(derive_key(1313, 1))
    mean100 = np.mean([poisson_count(100.0, s) for _ in range(10_000)])
    checks.append(("count CLT mean 100", abs(mean100 - 100.0) <= 0.4))

    region = Region(0.0, 0.0, 32.0)
    counts = [len(sample_poisson(region, 1.0, derive_key(1313, 2 + t))) for t in range(2000)]
    dev = abs(np.mean(counts) - 1024.0)
    checks.append(("sample count CLT", dev <= 4.0 * math.sqrt(1024.0 / 2000.0)))

    unit = sample_fixed(Region(0.0, 0.0, 1.0), 1000, 131313)
    checks.append(("coordinate CLT", abs(unit.x.mean() - 0.5) <= 4.0 * (1.0 / math.sqrt(12.0)) / math.sqrt(1000.0)))

    big = sample_fixed(Region(0.0, 0.0, 1.0), 8000, 131314)
    hist, _, _ = np.histogram2d(big.x, big.y, bins=4, range=[[0, 1], [0, 1]])
    chi2 = float(((hist - 500.0) ** 2 / 500.0).sum())
    from scipy import stats

    p_grid = float(stats.chi2.sf(chi2, 15))
    checks.append(("stratified chi2", p_grid > 1e-3))

    a = sample_poisson(region, 1.0, 777)
    b = sample_poisson(region, 1.0, 777)
    checks.append(("determinism", np.array_equal(a.xy, b.xy)))
    short = sample_fixed(region, 7, 778)
    long = sample_fixed(region, 10, 778)
    checks.append(("prefix coupling", np.array_equal(short.xy, long.xy[:7])))

    failed = [name for name, good in checks if not good]
    ok = not failed
    record_criterion(
        13,
        ok,
        f"sampler statistics: {len(checks) - len(failed)}/{len(checks)} checks at 1e-3 "
        f"(pmf p={p_pmf:.3f}, grid p={p_grid:.3f})"
        + (f"; failed: {', '.join(failed)}" if failed else ""),
    )
    assert ok


def test_criterion_14_reproducibility(tmp_path):
    def run_sweep(out, extra=()):
        args = [
            "sweep", "--n", "256", "--k", "2:6", "--trials", "40", "--seed", "77",
            "--out", str(out), "--manifest", str(out) + ".manifest.json", *extra,
        ]
        assert cli.run(args) == 0
        return out.read_bytes()

    base = run_sweep(tmp_path / "base.csv")
    serial = run_sweep(tmp_path / "serial.csv", ("--threads", "1"))
    wide = run_sweep(tmp_path / "wide.csv", ("--threads", "3"))

    manifest = json.loads((tmp_path / "base.csv.manifest.json").read_text())
    replay_cfg = dict(manifest["config"])
    replay_cfg["out"] = str(tmp_path / "replay.csv")
    cfg_path = tmp_path / "replay.json"
    cfg_path.write_text(json.dumps(replay_cfg))
    assert cli.run(["sweep", "--config", str(cfg_path)]) == 0
    replay = (tmp_path / "replay.csv").read_bytes()
    assert cli.run(["sweep", "--config", str(cfg_path), "--threads", "1"]) == 0
    replay_serial = (tmp_path / "replay.csv").read_bytes()

    ok = base == serial == wide == replay == replay_serial
    record_criterion(
        14,
        ok,
        "campaign bytes identical across default threading, --threads 1, --threads 3, "
        "and manifest replay" if ok else "campaign reruns disagreed",
    )
    assert ok
