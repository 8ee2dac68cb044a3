import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bregman_margin.data import (DataError, Dataset, SpheresConfig, check_separable,
                                 empirical_covariance, fixture_four_point, gen_spheres,
                                 gen_tightness, load_csv, load_json, make_rng, save_csv, save_json,
                                 signed_points, stats, tightness_vector)
from bregman_margin.linalg import NormSpec, norm


def test_signed_points():
    np.testing.assert_array_equal(signed_points(Dataset([[1.0, 0.0]], [1])), [[1, 0]])
    np.testing.assert_array_equal(signed_points(Dataset([[1.0, 0.0]], [-1])), [[-1, 0]])
    Z = signed_points(fixture_four_point())
    np.testing.assert_array_equal(Z, [[-0.5, 1], [0.5, 1], [0.75, 1], [2, 1]])


def test_fixture_shape(four):
    assert (four.n, four.d) == (4, 2)
    assert check_separable(four, [0, 1])
    assert not check_separable(four, [1, 0])
    assert not check_separable(four, [0, 0])


def test_dataset_is_read_only(four):
    with pytest.raises(ValueError):
        four.X[0, 0] = 1.0


def test_dataset_validation():
    with pytest.raises(DataError, match="labels"):
        Dataset([[1.0, 2.0]], [0])
    with pytest.raises(DataError):
        Dataset([[1.0, 2.0]], [1, -1])
    with pytest.raises(DataError):
        Dataset([[np.nan, 2.0]], [1])
    with pytest.raises(DataError):
        Dataset(np.zeros((0, 2)), [])


def test_stats(four):
    s = stats(four, NormSpec.l2())
    assert s.D_dual == pytest.approx(math.sqrt(5)) and s.D_2 == pytest.approx(math.sqrt(5))
    s = stats(Dataset([[1.0, 0.0]], [1]), NormSpec.l1())
    assert (s.D_dual, s.D_2) == (1, 1)
    ds, _ = gen_tightness(4)
    assert stats(ds, NormSpec.l1()).D_dual == 1


def test_tightness_examples():
    np.testing.assert_array_equal(tightness_vector(4), [1, 0.5, 0.5, 0.5])
    ds, z = gen_tightness(1)
    np.testing.assert_array_equal(ds.X, [[1], [-1]])
    np.testing.assert_array_equal(ds.y, [1, -1])
    with pytest.raises(DataError):
        gen_tightness(0)


@pytest.mark.parametrize("m", [1, 4, 9, 16, 25])
def test_tightness_ratio_formula(m):
    ds, z = gen_tightness(m)
    np.testing.assert_array_equal(ds.Z[0], ds.Z[1])
    ratio = (z @ z) / (norm(NormSpec.l1(), z) * norm(NormSpec.linf(), z))
    assert ratio == pytest.approx((2 - 1 / m) / (math.sqrt(m) - 1 / math.sqrt(m) + 1), rel=1e-12)


def test_spheres_deterministic():
    cfg = SpheresConfig(seed=11)
    a, b = gen_spheres(cfg), gen_spheres(cfg)
    np.testing.assert_array_equal(a[0].X, b[0].X)
    np.testing.assert_array_equal(a[0].y, b[0].y)
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2], b[2])
    c = gen_spheres(SpheresConfig(seed=12))
    assert not np.array_equal(a[1], c[1])


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_spheres_points_on_spheres(seed, d):
    ds, U, mu = gen_spheres(SpheresConfig(n_labeled=3, m_unlabeled=20, d=d, r=0.8, seed=seed))
    assert np.linalg.norm(mu) == pytest.approx(1, abs=1e-14)
    for x, y in zip(ds.X, ds.y):
        assert np.linalg.norm(x - y * mu) == pytest.approx(0.8, abs=1e-13)
    # unlabeled points sit on one of the two spheres
    dist = np.minimum(np.linalg.norm(U - mu, axis=1), np.linalg.norm(U + mu, axis=1))
    np.testing.assert_allclose(dist, 0.8, atol=1e-13)


def test_spheres_config_validation():
    with pytest.raises(DataError):
        SpheresConfig(r=0)
    with pytest.raises(DataError):
        SpheresConfig(d=1)


def test_spheres_angles_uniform():
    scipy_stats = pytest.importorskip("scipy.stats")
    ds, U, mu = gen_spheres(SpheresConfig(n_labeled=1, m_unlabeled=10_000, seed=3))
    # recover the centre of each unlabeled point, then its angle
    centre = np.where(np.linalg.norm(U - mu, axis=1) < np.linalg.norm(U + mu, axis=1), 1.0, -1.0)
    off = U - centre[:, None] * mu
    ang = np.arctan2(off[:, 1], off[:, 0])
    counts, _ = np.histogram(ang, bins=16, range=(-np.pi, np.pi))
    assert scipy_stats.chisquare(counts).pvalue > 1e-4
    # labels are a fair coin as well
    assert scipy_stats.binomtest(int((centre > 0).sum()), centre.size).pvalue > 1e-4


def test_covariance_limit():
    r = 0.8
    _, U, mu = gen_spheres(SpheresConfig(n_labeled=1, m_unlabeled=100_000, r=r, seed=5))
    target = np.eye(2) * r * r / 2 + np.outer(mu, mu)
    assert np.linalg.norm(empirical_covariance(U) - target) < 0.02


def test_covariance_examples():
    pts = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    np.testing.assert_array_equal(empirical_covariance(pts), np.diag([0.5, 0.5]))
    with pytest.raises(DataError):
        empirical_covariance([[1, 0], [1, 0]])
    _, U, _ = gen_spheres(SpheresConfig())
    assert np.all(np.linalg.eigvalsh(empirical_covariance(U)) > 0)


def test_rng_is_philox():
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)


def test_csv_round_trip(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0,2.0,1\n-1.0,-2.0,-1\n")
    ds = load_csv(p)
    assert (ds.n, ds.d) == (2, 2)
    save_csv(ds, tmp_path / "e.csv")
    back = load_csv(tmp_path / "e.csv")
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.y, ds.y)


def test_csv_header_detection(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("x1,x2,y\n0.5,1,1\n")
    assert load_csv(p).n == 1
    p.write_text("x1,x2,y\n")
    with pytest.raises(DataError, match="no data"):
        load_csv(p)


@pytest.mark.parametrize("body, line", [
    ("1,2,1\n3,4,0\n", 2),
    ("1,2,1\n3,4\n", 2),
    ("1,a,1\n", 1),
    ("1,2,1\n\n1,2,3,1\n", 3),
])
def test_csv_errors_name_line(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=f":{line}:"):
        load_csv(p)


def test_json_round_trip(tmp_path, four):
    save_json(four, tmp_path / "d.json")
    back = load_json(tmp_path / "d.json")
    np.testing.assert_array_equal(back.X, four.X)
    np.testing.assert_array_equal(back.y, four.y)
    with pytest.raises(DataError):
        Dataset.from_json([{"x": [1.0]}])
