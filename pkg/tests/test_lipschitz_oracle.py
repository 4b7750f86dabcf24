import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optsample.lipschitz_oracle import (
    CircleDesign,
    InconsistentData,
    central_reconstruct,
    exact_radius,
    expected_radius,
    lipschitz_consistent,
    optimal_error,
)

points_st = st.lists(st.floats(0, 1, exclude_max=True, allow_nan=False), min_size=1, max_size=30)


def _grid_norm(design, p, N=1_000_000):
    # independent oracle: midpoint rule on dist(., P) with brute-force distances
    x = (np.arange(N) + 0.5) / N
    pts = np.sort(design.points)
    idx = np.searchsorted(pts, x)
    left = pts[(idx - 1) % pts.size]
    right = pts[idx % pts.size]
    dl = np.abs(x - left) % 1.0
    dr = np.abs(right - x) % 1.0
    d = np.minimum(np.minimum(dl, 1.0 - dl), np.minimum(dr, 1.0 - dr))
    if math.isinf(p):
        return d.max()
    return float(np.mean(d ** p) ** (1.0 / p))


def test_equispaced_sup():
    for n in (1, 3, 10, 77):
        assert exact_radius(CircleDesign.equispaced(n, 0.3), math.inf) == pytest.approx(1 / (2 * n), rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_equispaced_finite_p(p):
    n = 9
    want = 0.5 * (1 / (1 + p)) ** (1 / p) / n
    assert exact_radius(CircleDesign.equispaced(n), p) == pytest.approx(want, rel=1e-12)


def test_single_point_p1():
    assert exact_radius(CircleDesign([0.2]), 1) == pytest.approx(0.25, rel=1e-14)


def test_optimal_error_examples():
    assert optimal_error(10, math.inf) == pytest.approx(0.05, rel=1e-15)
    assert optimal_error(2, 1) == pytest.approx(1 / 8, rel=1e-15)


@given(st.integers(1, 500), st.floats(1, 50))
def test_optimal_error_bracket(n, p):
    v = optimal_error(n, p)
    assert 1 / (4 * n) <= v <= 1 / (2 * n)


def test_expected_radius_examples():
    assert expected_radius(2, 1) == pytest.approx(1 / 6, rel=1e-14)
    assert expected_radius(2, math.inf) == pytest.approx(0.375, rel=1e-15)


@pytest.mark.parametrize("n,p", [(3, 1), (5, 2), (8, 3), (12, 1)])
def test_expected_radius_rational(n, p):
    # exact rational evaluation of n!/((p+1)...(p+n)) for integer p
    ratio = Fraction(math.factorial(n))
    for i in range(1, n + 1):
        ratio /= p + i
    assert expected_radius(n, p) == pytest.approx(0.5 * float(ratio) ** (1 / p), rel=1e-13)


def test_expected_radius_mc():
    r = np.random.default_rng(7)
    n, trials = 5, 4000
    for p in (1.0, 2.0, math.inf):
        vals = np.array([exact_radius(CircleDesign(r.random(n)), p) for _ in range(trials)])
        q = 1.0 if math.isinf(p) else p
        mom = vals ** q
        se = mom.std(ddof=1) / math.sqrt(trials)
        assert abs(mom.mean() - expected_radius(n, p) ** q) <= 3 * se


def test_plain_mean_below_moment():
    r = np.random.default_rng(8)
    vals = np.array([exact_radius(CircleDesign(r.random(5)), 2.0) for _ in range(4000)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert vals.mean() < expected_radius(5, 2.0) - 3 * se


@pytest.mark.parametrize("p", [1, 2, 5, math.inf])
def test_radius_against_grid(p):
    d = CircleDesign(np.random.default_rng(3).random(13))
    assert exact_radius(d, p) == pytest.approx(_grid_norm(d, p), abs=1e-6)


@given(points_st)
def test_gaps_sum_to_one(pts):
    d = CircleDesign(pts)
    assert abs(d.gaps.sum() - 1.0) < 1e-12
    assert np.all(d.gaps >= 0)


@given(points_st, st.floats(0, 1, exclude_max=True), st.sampled_from([1.0, 2.0, 5.0, math.inf]))
def test_adding_point_never_increases_radius(pts, extra, p):
    before = exact_radius(CircleDesign(pts), p)
    after = exact_radius(CircleDesign(pts + [extra]), p)
    assert after <= before * (1 + 1e-12) + 1e-15


def test_central_zero_data():
    d = CircleDesign([0.1, 0.4, 0.75])
    rec = central_reconstruct(d, np.zeros(3))
    x = np.linspace(0, 1, 101)
    assert np.allclose(rec(x), 0.0)
    upper, lower = rec.envelopes(x)
    assert np.allclose(upper, d.dist(x))
    assert np.allclose(lower, -d.dist(x))


def test_central_single_point():
    rec = central_reconstruct(CircleDesign([0.3]), [0.0])
    assert np.allclose(rec(np.linspace(0, 1, 17)), 0.0)


def _hat(c, w):
    def f(x):
        d = np.abs(np.asarray(x) - c) % 1.0
        return np.maximum(0.0, w - np.minimum(d, 1.0 - d))
    return f


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=15),
       st.floats(0, 1, exclude_max=True), st.floats(0.01, 0.5))
def test_central_properties(pts, c, w):
    d = CircleDesign(pts)
    f = _hat(c, w)
    y = f(d.points)
    rec = central_reconstruct(d, y)
    assert rec.consistent
    # interpolation
    assert np.allclose(rec(d.points), y, atol=1e-12)
    x = np.linspace(0, 1, 2001)
    upper, lower = rec.envelopes(x)
    v = rec(x)
    assert np.all(lower <= v + 1e-12) and np.all(v <= upper + 1e-12)
    # Lipschitz constant <= 1 on the grid (torus metric)
    slope = np.abs(np.diff(np.append(v, v[0]))) / (1 / 2000)
    assert slope.max() <= 1 + 1e-6
    # sup error bounded by the radius plus grid resolution
    assert np.max(np.abs(v - f(x))) <= exact_radius(d, math.inf) + 1e-3


def test_central_vs_linear_interpolation():
    # central reconstruction is within a factor two of periodic linear interpolation
    r = np.random.default_rng(11)
    d = CircleDesign(r.random(12))
    f = _hat(0.37, 0.2)
    x = np.linspace(0, 1, 20001)
    rec = central_reconstruct(d, f(d.points))
    xp = np.concatenate([d.points - 1, d.points, d.points + 1])
    lin = np.interp(x, xp, np.tile(f(d.points), 3))
    e_central = np.max(np.abs(rec(x) - f(x)))
    e_lin = np.max(np.abs(lin - f(x)))
    assert e_central <= 2 * max(e_lin, 1e-15) + 1e-4
    assert e_central <= exact_radius(d, math.inf) + 1e-4


def test_inconsistent_flag():
    d = CircleDesign([0.0, 0.1])
    assert not lipschitz_consistent(d, [0.0, 1.0])
    with pytest.warns(InconsistentData):
        rec = central_reconstruct(d, [0.0, 1.0])
    assert not rec.consistent


def test_consistent_no_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        central_reconstruct(CircleDesign([0.0, 0.5]), [0.0, 0.5])
