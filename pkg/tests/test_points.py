"""Point sampling, deletion, and the CSV replay format."""

import math

import numpy as np
import pytest
from scipy import stats

from rggconn.points import (
    PointSet,
    Region,
    delete_points,
    read_csv,
    sample_fixed,
    sample_poisson,
    write_csv,
)

UNIT = Region(0.0, 0.0, 1.0)


def test_region_validates():
    with pytest.raises(ValueError):
        Region(0.0, 0.0, -1.0)
    r = Region(2.0, 3.0, 4.0)
    assert r.area == 16.0
    assert bool(r.contains(np.array([2.0]), np.array([7.0]))[0])  # closed square
    assert not bool(r.contains(np.array([6.5]), np.array([5.0]))[0])


def test_concentric_subsquares():
    r = Region(0.0, 0.0, 8.0)
    half = r.concentric(0.5)
    assert (half.origin_x, half.origin_y, half.side) == (2.0, 2.0, 4.0)
    quarter = r.concentric(0.25)
    assert (quarter.origin_x, quarter.origin_y, quarter.side) == (3.0, 3.0, 2.0)


def test_pointset_rejects_outside_points():
    with pytest.raises(ValueError):
        PointSet(UNIT, np.array([[0.5, 1.5]]), seed=0)
    with pytest.raises(ValueError):
        PointSet(UNIT, np.zeros((3, 3)), seed=0)


def test_sample_poisson_deterministic():
    r = Region(0.0, 0.0, 8.0)
    a = sample_poisson(r, 1.0, 123)
    b = sample_poisson(r, 1.0, 123)
    assert np.array_equal(a.xy, b.xy)
    assert len(sample_poisson(Region(0.0, 0.0, 0.0), 1.0, 5)) == 0


def test_sample_poisson_count_clt():
    # area 1024, 2000 trials: mean count within 4 standard errors
    r = Region(0.0, 0.0, 32.0)
    counts = [len(sample_poisson(r, 1.0, s)) for s in range(2000)]
    tol = 4.0 * math.sqrt(1024.0 / 2000.0)
    assert abs(np.mean(counts) - 1024.0) <= tol


def test_sample_fixed_prefix_property():
    small = sample_fixed(UNIT, 7, 31)
    big = sample_fixed(UNIT, 10, 31)
    assert np.array_equal(small.xy, big.xy[:7])
    assert len(sample_fixed(UNIT, 0, 31)) == 0


def test_sample_fixed_mean_coordinate():
    ps = sample_fixed(UNIT, 1000, 77)
    tol = 4.0 * (1.0 / math.sqrt(12.0)) / math.sqrt(1000.0)
    assert abs(ps.x.mean() - 0.5) <= tol
    assert abs(ps.y.mean() - 0.5) <= tol


def test_sample_fixed_stratified_uniformity():
    # 4x4 cell counts consistent with a flat multinomial at 1e-3
    ps = sample_fixed(UNIT, 8000, 5150)
    ix = np.clip((ps.x * 4).astype(int), 0, 3)
    iy = np.clip((ps.y * 4).astype(int), 0, 3)
    counts = np.bincount(ix * 4 + iy, minlength=16)
    chi2 = float(((counts - 500.0) ** 2 / 500.0).sum())
    assert stats.chi2.sf(chi2, 15) > 1e-3


def test_delete_points():
    ps = sample_fixed(UNIT, 10, 9)
    assert np.array_equal(delete_points(ps, []).xy, ps.xy)
    assert len(delete_points(ps, np.arange(10))) == 0
    survived = delete_points(ps, [0])
    assert np.array_equal(survived.xy, ps.xy[1:])
    with pytest.raises(ValueError):
        delete_points(ps, [10])
    with pytest.raises(ValueError):
        delete_points(ps, [-11])


def test_csv_round_trip(tmp_path):
    ps = sample_poisson(Region(0.0, 0.0, 5.0), 1.3, 321)
    path = tmp_path / "pts.csv"
    write_csv(ps, path)
    text = path.read_text()
    assert "# side=5" in text
    assert "# seed=321" in text
    assert text.splitlines()[-1].count(",") == 1
    back = read_csv(path)
    assert back.seed == ps.seed
    assert back.region.side == ps.region.side
    assert np.array_equal(back.xy, ps.xy)  # 17 digits make this exact
