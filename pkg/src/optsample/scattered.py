"""Recovery from scattered points on the unit cube by dyadic cube splitting
and local polynomial least squares, plus point-set quality measures.

Cubes are dyadic and stored as ``(level, integer corner)``; a cube of level
``j`` has side ``2^-j``. Sub-cells are half-open, so every point of
``[0, 1)^d`` lies in exactly one cell of any dyadic grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import cells_occupied, min_distance
from .lipschitz_oracle import CircleDesign, exact_radius
from .model import Domain, Measure, as_rng


@dataclass(frozen=True)
class Cube:
    level: int
    corner_index: tuple

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def corner(self) -> np.ndarray:
        return np.asarray(self.corner_index, dtype=float) * self.side

    def children(self):
        d = len(self.corner_index)
        base = np.asarray(self.corner_index) * 2
        for offs in itertools.product((0, 1), repeat=d):
            yield Cube(self.level + 1, tuple(int(v) for v in base + offs))


@dataclass
class CubeDecomposition:
    """Output of the splitting loop.

    ``members[i]`` holds the indices of the input points inside ``cubes[i]``.
    ``tested`` counts the cubes examined by the split test.
    """

    cubes: list
    members: list
    ell: int
    d: int
    points: np.ndarray
    tested: int

    @property
    def is_root(self):
        return len(self.cubes) == 1 and self.cubes[0].level == 0

    def to_json(self):
        return [
            {"corner": [float(v) for v in c.corner], "side": c.side, "points": int(len(mem))}
            for c, mem in zip(self.cubes, self.members)
        ]

    def locate(self, x) -> np.ndarray:
        """Index of the cube containing each row of ``x``.

        Points on shared faces go to the containing cube with the
        lexicographically smallest corner.
        """
        x = np.clip(np.asarray(x, dtype=float).reshape(-1, self.d), 0.0, 1.0)
        out = np.full(x.shape[0], -1, dtype=np.int64)
        levels = sorted({c.level for c in self.cubes})
        tables = {}
        for i, c in enumerate(self.cubes):
            tables.setdefault(c.level, {})[c.corner_index] = i
        maxlev = levels[-1]
        on_face = np.any(np.abs(x * 2 ** maxlev - np.round(x * 2 ** maxlev)) < 1e-12, axis=1)
        for lev in levels:
            shape = (2 ** lev,) * self.d
            keys = np.minimum(np.floor(x * 2 ** lev).astype(np.int64), 2 ** lev - 1)
            flat = np.ravel_multi_index(keys.T, shape)
            codes = np.array([np.ravel_multi_index(k, shape) for k in tables[lev]], dtype=np.int64)
            ids = np.array(list(tables[lev].values()), dtype=np.int64)
            order = np.argsort(codes)
            codes, ids = codes[order], ids[order]
            pos = np.clip(np.searchsorted(codes, flat), 0, codes.size - 1)
            hit = (codes[pos] == flat) & (out < 0)
            out[hit] = ids[pos[hit]]
        for i in np.flatnonzero(on_face):
            best = None
            for lev in levels:
                t = x[i] * 2 ** lev
                opts = [sorted({min(int(math.floor(v)), 2 ** lev - 1), max(int(math.ceil(v)) - 1, 0)}) for v in t]
                for idx in itertools.product(*opts):
                    hit = tables[lev].get(tuple(idx))
                    if hit is not None:
                        key = tuple(np.asarray(idx, dtype=float) / 2 ** lev)
                        if best is None or key < best[0]:
                            best = (key, hit)
            out[i] = best[1]
        return out


def _split_test(pts, cube: Cube, ell: int) -> bool:
    # every 2^d child has all (2 ell)^d cells occupied <=> all (4 ell)^d cells of Q are
    return bool(cells_occupied(pts, cube.corner, cube.side, 4 * ell))


def cube_split(points, ell: int) -> CubeDecomposition:
    """Dyadic cube splitting.

    A cube is replaced by its ``2^d`` children iff each child has a point in
    every one of its ``(2 ell)^d`` sub-cells; otherwise it is final.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if ell < 1:
        raise ValueError("ell must be >= 1")
    d = pts.shape[1]
    root = Cube(0, (0,) * d)
    pool = [(root, np.arange(pts.shape[0]))]
    final, members = [], []
    tested = 0
    while pool:
        nxt = []
        for cube, idx in pool:
            tested += 1
            if idx.size >= (4 * ell) ** d and _split_test(pts[idx], cube, ell):
                rel = np.floor((pts[idx] - cube.corner) / (cube.side / 2)).astype(np.int64)
                rel = np.clip(rel, 0, 1)
                flat = np.ravel_multi_index(rel.T, (2,) * d)
                for k, child in enumerate(cube.children()):
                    nxt.append((child, idx[flat == k]))
            else:
                final.append(cube)
                members.append(idx)
        pool = nxt
    return CubeDecomposition(final, members, ell, d, pts, tested)


def check_decomposition(dec: CubeDecomposition, tol: float = 1e-12) -> dict:
    """Evaluate the four structural invariants by direct enumeration."""
    d, ell = dec.d, dec.ell
    vol = sum(c.side ** d for c in dec.cubes)
    coverage = abs(vol - 1.0) < tol
    disjoint = True
    by_level = {}
    for c in dec.cubes:
        by_level.setdefault(c.level, set()).add(c.corner_index)
    for c in dec.cubes:
        # no ancestor of c may be a final cube
        idx = np.asarray(c.corner_index)
        for lev in range(c.level):
            anc = tuple(int(v) for v in idx >> (c.level - lev))
            if anc in by_level.get(lev, ()):
                disjoint = False
    occupancy = True
    empty_cell = True
    for c, mem in zip(dec.cubes, dec.members):
        sub = dec.points[mem]
        if not dec.is_root and not cells_occupied(sub, c.corner, c.side, 2 * ell):
            occupancy = False
        if cells_occupied(sub, c.corner, c.side, 4 * ell):
            empty_cell = False
    return {"coverage": coverage, "disjoint": disjoint, "occupancy": occupancy, "empty_subcube": empty_cell}


# ---------------------------------------------------------------------------
# local polynomial recovery


def monomial_exponents(d: int, s: int):
    return [e for deg in range(s + 1) for e in itertools.product(range(deg + 1), repeat=d) if sum(e) == deg]


def _vander(t, exps):
    return np.stack([np.prod(t ** np.asarray(e), axis=1) for e in exps], axis=1)


@dataclass
class PiecewiseApproximant:
    """Polynomial pieces on the cubes of a decomposition.

    ``coefficients[j]`` are monomial coefficients in the local coordinates
    ``2 (x - corner) / side - 1`` of cube ``j``; ``degrees[j]`` is the total
    degree actually used (lower than ``s`` after a fallback).
    """

    decomposition: CubeDecomposition
    s: int
    coefficients: list
    degrees: list
    nodes: list = field(default_factory=list)
    zero: bool = False

    @property
    def fallbacks(self):
        return sum(1 for deg in self.degrees if deg < self.s)

    def __call__(self, x):
        dec = self.decomposition
        x = np.asarray(x, dtype=float).reshape(-1, dec.d)
        out = np.zeros(x.shape[0])
        if self.zero:
            return out
        where = dec.locate(x)
        order = np.argsort(where, kind="stable")
        bounds = np.searchsorted(where[order], np.arange(len(dec.cubes) + 1))
        for j, cube in enumerate(dec.cubes):
            sel = order[bounds[j]:bounds[j + 1]]
            if sel.size == 0:
                continue
            t = 2.0 * (x[sel] - cube.corner) / cube.side - 1.0
            exps = monomial_exponents(dec.d, self.degrees[j])
            out[sel] = _vander(t, exps) @ self.coefficients[j]
        return out


def select_nodes(dec: CubeDecomposition, j: int, ell: int) -> np.ndarray:
    """For each of the ``ell^d`` sub-cells of cube ``j``, the index of the
    member point nearest to the sub-cell center (cells without points are
    skipped)."""
    cube, mem = dec.cubes[j], dec.members[j]
    if mem.size == 0:
        return mem
    pts = dec.points[mem]
    h = cube.side / ell
    cell = np.clip(np.floor((pts - cube.corner) / h).astype(np.int64), 0, ell - 1)
    flat = np.ravel_multi_index(cell.T, (ell,) * dec.d)
    chosen = []
    for k in np.unique(flat):
        inside = np.flatnonzero(flat == k)
        center = cube.corner + (np.asarray(np.unravel_index(k, (ell,) * dec.d)) + 0.5) * h
        dist = np.max(np.abs(pts[inside] - center), axis=1)
        chosen.append(mem[inside[np.argmin(dist)]])
    return np.asarray(chosen, dtype=np.int64)


def piecewise_recover(values, points, s: int, ell: int | None = None, d: int | None = None,
                      decomposition: CubeDecomposition | None = None, cond_max: float = 1e10) -> PiecewiseApproximant:
    """Piecewise polynomial of total degree ``<= s`` on the split cubes.

    Each piece is the unweighted least-squares fit to the values at the
    selected nodes of its cube. If the split returns only the root cube the
    result is the zero function.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1 if d in (None, 1) else d)
    y = np.asarray(values, dtype=float).ravel()
    ell = s + 1 if ell is None else ell
    dec = decomposition if decomposition is not None else cube_split(pts, ell)
    if dec.is_root:
        return PiecewiseApproximant(dec, s, [np.zeros(1)], [0], [np.zeros(0, dtype=np.int64)], zero=True)
    coefs, degrees, nodes = [], [], []
    for j, cube in enumerate(dec.cubes):
        idx = select_nodes(dec, j, ell)
        t = 2.0 * (pts[idx] - cube.corner) / cube.side - 1.0
        for deg in range(s, -1, -1):
            V = _vander(t, monomial_exponents(dec.d, deg))
            if V.shape[0] >= V.shape[1]:
                sv = np.linalg.svd(V, compute_uv=False)
                if sv[-1] > 0 and sv[0] / sv[-1] < cond_max:
                    break
        c, *_ = np.linalg.lstsq(V, y[idx], rcond=None)
        coefs.append(c)
        degrees.append(deg)
        nodes.append(idx)
    return PiecewiseApproximant(dec, s, coefs, degrees, nodes)


# ---------------------------------------------------------------------------
# point-set quality


def covering_radius(points, domain: Domain, mc_budget: int = 100_000, seed=0) -> float:
    """``sup_x dist(x, P)``: exact on the circle, a Monte Carlo max elsewhere."""
    if domain.kind == "circle":
        return exact_radius(CircleDesign(points), math.inf)
    pts = domain.as_points(points)
    x = Measure.uniform(domain).sample(mc_budget, as_rng(seed))
    return float(min_distance(x, pts).max())


def distortion(points, gamma: float, domain: Domain, mc_budget: int = 100_000, seed=0) -> float:
    """``||dist(., P)||_{L_gamma}``: exact on the circle, Monte Carlo elsewhere."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if math.isinf(gamma):
        return covering_radius(points, domain, mc_budget, seed)
    if domain.kind == "circle":
        gaps = CircleDesign(points).gaps
        return math.fsum(2.0 * (g / 2.0) ** (gamma + 1) / (gamma + 1) for g in gaps) ** (1.0 / gamma)
    pts = domain.as_points(points)
    x = Measure.uniform(domain).sample(mc_budget, as_rng(seed))
    return float(np.mean(min_distance(x, pts) ** gamma) ** (1.0 / gamma))
