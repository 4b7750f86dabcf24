import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optsample.model import Domain
from optsample.scattered import (
    Cube,
    _vander,
    check_decomposition,
    covering_radius,
    cube_split,
    distortion,
    monomial_exponents,
    piecewise_recover,
    select_nodes,
)

# calibrated once on seeds 0..19 (max observed 3.27), frozen
LOCAL_FIT_C = 5.0


def test_hand_traced_split():
    pts = np.arange(8) / 8 + 1 / 16
    dec = cube_split(pts, 2)
    assert [(c.level, c.corner_index) for c in dec.cubes] == [(1, (0,)), (1, (1,))]
    assert [c.side for c in dec.cubes] == [0.5, 0.5]
    assert dec.tested == 3
    assert [len(m) for m in dec.members] == [4, 4]


def test_root_fallback():
    # no point in the right half: the first split test fails
    pts = np.random.default_rng(0).random((200, 2)) * [0.5, 1.0]
    dec = cube_split(pts, 2)
    assert dec.is_root and dec.tested == 1


def test_root_fallback_recovery_is_zero():
    pts = np.random.default_rng(0).random(50) * 0.5
    approx = piecewise_recover(np.sin(pts), pts, 2, 3)
    assert approx.zero
    assert np.all(approx(np.linspace(0, 1, 9)) == 0)


@pytest.mark.parametrize("d,ell", [(1, 2), (2, 1), (2, 2)])
def test_full_grid_splits(d, ell):
    k = 4 * ell
    centers = (np.stack(np.meshgrid(*([np.arange(k)] * d), indexing="ij"), -1).reshape(-1, d) + 0.5) / k
    dec = cube_split(centers, ell)
    assert not dec.is_root
    assert all(check_decomposition(dec).values())


@given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 10_000), st.integers(10, 600))
def test_invariants_random(d, ell, seed, n):
    pts = np.random.default_rng(seed).random((n, d))
    dec = cube_split(pts, ell)
    inv = check_decomposition(dec)
    assert inv == {"coverage": True, "disjoint": True, "occupancy": True, "empty_subcube": True}
    assert sum(len(m) for m in dec.members) == n


@given(st.integers(0, 10_000))
def test_locate_members_consistent(seed):
    pts = np.random.default_rng(seed).random((400, 2))
    dec = cube_split(pts, 1)
    where = dec.locate(pts)
    for j, mem in enumerate(dec.members):
        assert np.all(where[mem] == j)


def test_locate_tie_break():
    pts = np.arange(8) / 8 + 1 / 16
    dec = cube_split(pts, 2)
    # x = 1/2 lies on the shared face of [0,1/2] and [1/2,1]
    assert dec.locate([0.5])[0] == 0
    assert dec.locate([0.0])[0] == 0 and dec.locate([1.0])[0] == 1


def test_children():
    kids = list(Cube(1, (1, 0)).children())
    assert [k.corner_index for k in kids] == [(2, 0), (2, 1), (3, 0), (3, 1)]
    assert all(k.side == 0.25 for k in kids)


def test_decomposition_json():
    dec = cube_split(np.arange(8) / 8 + 1 / 16, 2)
    data = json.loads(json.dumps(dec.to_json()))
    assert data == [{"corner": [0.0], "side": 0.5, "points": 4}, {"corner": [0.5], "side": 0.5, "points": 4}]


@pytest.mark.parametrize("d", [1, 2])
def test_polynomial_reproduction(d):
    pts = np.random.default_rng(d).random((3000 if d == 1 else 6000, d))
    poly = lambda x: 1 + 2 * x[:, 0] - x[:, 0] ** 2 + (0.5 * x[:, 0] * x[:, -1] if d == 2 else 0)
    approx = piecewise_recover(poly(pts), pts, 2, 3, d)
    assert not approx.zero and approx.fallbacks == 0
    x = np.random.default_rng(9).random((2000, d))
    assert np.max(np.abs(approx(x) - poly(x))) < 1e-8


def test_zero_function():
    pts = np.random.default_rng(4).random((500, 1))
    approx = piecewise_recover(np.zeros(500), pts, 2)
    assert np.all(approx(np.linspace(0, 1, 33)) == 0)


def test_degree_fallback_recorded():
    # one cube, nodes chosen from an ell=1 grid: a single node cannot carry degree 2
    pts = np.arange(8) / 8 + 1 / 16
    approx = piecewise_recover(np.ones(8), pts, 2, ell=1)
    assert approx.fallbacks > 0
    assert np.allclose(approx(np.linspace(0, 1, 5)), 1.0)


def test_node_selection_one_per_cell():
    pts = np.random.default_rng(5).random((800, 2))
    dec = cube_split(pts, 3)
    for j in range(len(dec.cubes)):
        idx = select_nodes(dec, j, 3)
        c = dec.cubes[j]
        cells = np.floor((dec.points[idx] - c.corner) / (c.side / 3)).astype(int)
        assert len({tuple(v) for v in cells}) == len(idx) == 9


def test_local_fit_constant():
    f = lambda x: np.sin(3 * x[:, 0]) * (np.cos(2 * x[:, 1]) if x.shape[1] > 1 else 1) + np.exp(x[:, 0])
    g = (np.arange(41) + 0.5) / 41
    for d in (1, 2):
        for seed in range(30, 36):
            pts = np.random.default_rng(seed).random((2000 if d == 1 else 8000, d))
            approx = piecewise_recover(f(pts), pts, 2, 3, d)
            G = np.stack(np.meshgrid(*([g] * d), indexing="ij"), -1).reshape(-1, d)
            for j, c in enumerate(approx.decomposition.cubes):
                X = c.corner + G * c.side
                V = _vander(2 * (X - c.corner) / c.side - 1, monomial_exponents(d, 2))
                cb, *_ = np.linalg.lstsq(V, f(X), rcond=None)
                best = np.max(np.abs(f(X) - V @ cb))
                assert np.max(np.abs(f(X) - approx(X))) <= LOCAL_FIT_C * best + 1e-13


def test_covering_radius_circle():
    assert covering_radius((np.arange(10) + 0.2) / 10, Domain.circle()) == pytest.approx(0.05)
    assert covering_radius([0.3], Domain.circle()) == pytest.approx(0.5)


def test_covering_radius_cube_nested_budgets():
    pts = np.random.default_rng(1).random((30, 2))
    small = covering_radius(pts, Domain.cube(2), 1000, seed=3)
    big = covering_radius(pts, Domain.cube(2), 20_000, seed=3)
    assert small <= big
    # brute-force reference on a fine grid bounds the estimate from above (up to grid spacing)
    g = (np.arange(401) / 400)
    G = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    ref = np.sqrt(((G[:, None, :] - pts[None]) ** 2).sum(-1)).min(1).max()
    assert big <= ref + 1e-12 + math.sqrt(2) / 400


def test_distortion_equispaced():
    for n in (3, 10):
        pts = np.arange(n) / n
        assert distortion(pts, 1, Domain.circle()) == pytest.approx(1 / (4 * n))
        assert distortion(pts, math.inf, Domain.circle()) == covering_radius(pts, Domain.circle())


def test_distortion_numeric_integration():
    pts = np.random.default_rng(2).random(9)
    x = (np.arange(1_000_000) + 0.5) / 1e6
    srt = np.sort(pts)
    idx = np.searchsorted(srt, x)
    a = np.abs(x - srt[(idx - 1) % 9]) % 1
    b = np.abs(srt[idx % 9] - x) % 1
    dist = np.minimum(np.minimum(a, 1 - a), np.minimum(b, 1 - b))
    for gamma in (1.0, 3.0):
        assert distortion(pts, gamma, Domain.circle()) == pytest.approx(np.mean(dist ** gamma) ** (1 / gamma), abs=1e-6)


def test_distortion_vs_covering_ratio_grows():
    ratios = []
    for n in (16, 256):
        r = np.random.default_rng(n)
        vals = [(covering_radius(p, Domain.circle()), distortion(p, 1, Domain.circle()))
                for p in (r.random(n) for _ in range(300))]
        cov, dis = np.mean(vals, axis=0)
        assert dis * n == pytest.approx(0.5, rel=0.2)  # E ||dist||_1 = 1/(2(n+1))
        ratios.append(cov / dis)
    assert ratios[1] > ratios[0]


def test_distortion_rejects_bad_gamma():
    with pytest.raises(ValueError):
        distortion([0.1], 0, Domain.circle())
