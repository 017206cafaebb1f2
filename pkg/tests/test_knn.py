"""Exact neighbour-graph construction against brute-force oracles."""

import math

import numpy as np
import pytest

import _oracles
from rggconn.analysis import is_connected
from rggconn.knn import (
    UndefinedRadiusError,
    build_gilbert,
    build_index,
    build_knn,
    kth_nn_radius,
    longest_edge,
    restrict_k,
    write_graph_csv,
)
from rggconn.points import PointSet, Region, delete_points, sample_fixed

COLLINE = PointSet(
    Region(0.0, 0.0, 6.0),
    np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [6.0, 0.0]]),
    seed=0,
)


def _edge_set(g):
    eu, ev = g.undirected_edges()
    return set(zip(eu.tolist(), ev.tolist()))


def test_collinear_directed_lists():
    g = build_knn(COLLINE, 1)
    assert g.out_idx.tolist() == [[1], [0], [1], [2]]
    assert _edge_set(g) == {(0, 1), (1, 2), (2, 3)}
    assert is_connected(g)


def test_small_m_gives_complete_graph():
    ps = sample_fixed(Region(0.0, 0.0, 2.0), 3, 4)
    g = build_knn(ps, 5)
    assert g.width == 2
    assert _edge_set(g) == {(0, 1), (0, 2), (1, 2)}


def test_oracle_equivalence_medium():
    ps = sample_fixed(Region(0.0, 0.0, 10.0), 300, 8)
    g = build_knn(ps, 6)
    idx, d2 = _oracles.brute_knn_lists(ps.xy, 6)
    assert np.array_equal(g.out_idx, idx)
    assert np.array_equal(g.out_d2, d2)
    assert _edge_set(g) == _oracles.brute_knn_edges(ps.xy, 6)


def test_oracle_equivalence_small_sweep():
    for seed in range(12):
        m = 2 + (seed * 13) % 40
        ps = sample_fixed(Region(0.0, 0.0, 3.0), m, seed)
        for k in (1, 3, 7):
            g = build_knn(ps, k)
            idx, _ = _oracles.brute_knn_lists(ps.xy, k)
            assert np.array_equal(g.out_idx, idx), (seed, m, k)


def test_grid_resolution_invariance():
    ps = sample_fixed(Region(0.0, 0.0, 4.0), 120, 3)
    base = build_knn(ps, 5)
    for target in (0.25, 1.0, 8.0):
        alt = build_knn(ps, 5, target_per_cell=target)
        assert np.array_equal(alt.out_idx, base.out_idx)


def test_shared_index_reuse():
    ps = sample_fixed(Region(0.0, 0.0, 4.0), 80, 6)
    idx = build_index(ps)
    for k in (1, 2, 5):
        assert np.array_equal(
            build_knn(ps, k, index=idx).out_idx, build_knn(ps, k).out_idx
        )


def test_tie_break_by_index():
    # three candidates at exactly distance 1; k=2 keeps the two smallest indices
    pts = np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]])
    g = build_knn(PointSet(Region(0.0, 0.0, 3.0), pts, seed=0), 2)
    assert g.out_idx[0].tolist() == [1, 2]


def test_k_validation():
    with pytest.raises(ValueError):
        build_knn(COLLINE, 0)
    with pytest.raises(ValueError):
        build_knn(COLLINE, True)


def test_edge_nesting_in_k():
    ps = sample_fixed(Region(0.0, 0.0, 6.0), 90, 12)
    prev = _edge_set(build_knn(ps, 1))
    for k in range(2, 8):
        cur = _edge_set(build_knn(ps, k))
        assert prev <= cur
        prev = cur


def test_degree_lower_bound():
    for seed in (0, 1, 2):
        ps = sample_fixed(Region(0.0, 0.0, 5.0), 60, seed)
        for k in (1, 3, 6):
            g = build_knn(ps, k)
            assert int(g.degrees().min()) >= min(k, len(ps) - 1)


def test_deletion_subgraph_property():
    # surviving edges at k sit inside the original graph at k + L
    rng = np.random.default_rng(5)
    for case in range(20):
        ps = sample_fixed(Region(0.0, 0.0, 6.0), 50, case)
        L = 1 + case % 5
        victims = np.sort(rng.choice(50, size=L, replace=False))
        keep = np.setdiff1d(np.arange(50), victims)
        sub = build_knn(delete_points(ps, victims), 3)
        sup = _edge_set(build_knn(ps, 3 + L))
        for u, v in zip(*sub.undirected_edges()):
            a, b = int(keep[u]), int(keep[v])
            assert (min(a, b), max(a, b)) in sup


def test_restrict_k_matches_fresh_build():
    ps = sample_fixed(Region(0.0, 0.0, 5.0), 70, 2)
    g8 = build_knn(ps, 8)
    for k in (1, 3, 8):
        view = restrict_k(g8, k)
        assert np.shares_memory(view.out_idx, g8.out_idx)
        assert np.array_equal(view.out_idx, build_knn(ps, k).out_idx)
    with pytest.raises(ValueError):
        restrict_k(g8, 9)


def test_gilbert_extremes():
    ps = sample_fixed(Region(0.0, 0.0, 4.0), 30, 9)
    assert build_gilbert(ps, 0.0).num_edges() == 0
    diag = 4.0 * math.sqrt(2.0)
    assert build_gilbert(ps, diag).num_edges() == 30 * 29 // 2
    with pytest.raises(ValueError):
        build_gilbert(ps, -0.5)


def test_gilbert_oracle_equivalence():
    ps = sample_fixed(Region(0.0, 0.0, 10.0), 300, 14)
    g = build_gilbert(ps, 1.5)
    assert _edge_set(g) == _oracles.brute_gilbert_edges(ps.xy, 1.5)


def test_gilbert_monotone_in_radius():
    ps = sample_fixed(Region(0.0, 0.0, 5.0), 100, 21)
    prev = set()
    for r in (0.2, 0.5, 1.0, 2.0):
        cur = _edge_set(build_gilbert(ps, r))
        assert prev <= cur
        prev = cur


def test_kth_nn_radius():
    g = build_knn(COLLINE, 1)
    assert kth_nn_radius(g, 3) == 3.0
    twin = PointSet(Region(0.0, 0.0, 1.0), np.array([[0.5, 0.5], [0.5, 0.5]]), seed=0)
    assert kth_nn_radius(build_knn(twin, 1), 0) == 0.0
    # definitional consistency: radius equals the last sorted out-distance
    ps = sample_fixed(Region(0.0, 0.0, 4.0), 40, 8)
    g = build_knn(ps, 4)
    for v in range(10):
        assert kth_nn_radius(g, v) == math.sqrt(g.out_d2[v, -1])
    lonely = PointSet(Region(0.0, 0.0, 1.0), np.array([[0.1, 0.1]]), seed=0)
    with pytest.raises(UndefinedRadiusError):
        kth_nn_radius(build_knn(lonely, 1), 0)


def test_longest_edge():
    assert longest_edge(build_gilbert(sample_fixed(Region(0.0, 0.0, 2.0), 5, 1), 0.0)) == 0.0
    assert longest_edge(build_knn(COLLINE, 1)) == 3.0
    corners = PointSet(
        Region(0.0, 0.0, 1.0),
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        seed=0,
    )
    assert longest_edge(build_knn(corners, 3)) == math.sqrt(2.0)


def test_graph_csv_dump(tmp_path):
    g = build_knn(COLLINE, 1)
    p = tmp_path / "g.csv"
    write_graph_csv(g, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "# model=knn k=1"
    assert lines[1] == "u,v,length"
    assert lines[2] == "0,1,1"
    gil = build_gilbert(COLLINE, 2.5)
    write_graph_csv(gil, p)
    assert p.read_text().splitlines()[0] == "# model=gilbert r=2.5"
