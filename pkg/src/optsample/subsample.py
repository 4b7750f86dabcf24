"""Greedy barrier construction of points and weights.

Two families are tracked: an orthonormal family ``a`` spanning ``V_m`` and an
auxiliary family ``b`` with ``J = int b b^* dmu``. Each accepted point keeps
``G - ell I`` (lower barrier, from ``a``) and ``u J - Gamma`` (upper barrier,
from ``b``) positive definite, which yields two-sided spectral bounds.

When ``J`` is diagonal (orthonormal tail families) the upper barrier is
handled by the Woodbury identity, so ``N`` may be tens of thousands while
each step costs ``O(N k)`` with ``k`` the number of accepted points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .leastsq import SpectralCertificate
from .model import Basis, Measure, SampledDesign, as_rng


class OracleExhausted(RuntimeError):
    """The point oracle ran out of suggestions before ``n`` acceptances."""


class DimensionOverflow(ValueError):
    """The auxiliary family would exceed the configured size cap."""


# ---------------------------------------------------------------------------
# auxiliary families


class AuxFamily:
    """Finite family ``b = (b_1..b_N)`` with known ``J = int b b^* dmu``.

    ``J`` is stored either as a vector (``diagonal=True``) or a dense matrix.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], J, diagonal: bool):
        self.func = func
        self.J = np.asarray(J)
        self.diagonal = diagonal

    @property
    def size(self):
        return self.J.shape[0]

    def __call__(self, x):
        return np.asarray(self.func(x), dtype=np.complex128)

    def lambda_max(self):
        if self.diagonal:
            return float(self.J.max())
        return float(np.linalg.eigvalsh(self.J)[-1])

    def trace(self):
        return float(np.real(self.J.sum() if self.diagonal else np.trace(self.J)))

    @classmethod
    def tail(cls, basis: Basis, indices, scales, constant: Optional[float] = None):
        """``b = (constant, scales[j] * b_{indices[j]})`` for an orthonormal basis."""
        indices = np.asarray(indices, dtype=np.int64)
        scales = np.asarray(scales, dtype=float)
        J = scales ** 2
        if constant is not None:
            J = np.concatenate([[constant ** 2], J])

        def func(x):
            vals = basis.matrix(x, indices) * scales
            if constant is not None:
                vals = np.concatenate([np.full((vals.shape[0], 1), constant, dtype=np.complex128), vals], axis=1)
            return vals

        return cls(func, J, diagonal=True)

    @classmethod
    def constant(cls, value=1.0):
        return cls(lambda x: np.full((np.atleast_2d(x).shape[0] if np.ndim(x) > 1 else np.size(x), 1), value,
                                     dtype=np.complex128), np.array([value ** 2]), diagonal=True)

    @classmethod
    def monte_carlo(cls, func, measure: Measure, budget: int = 1_000_000, seed=0, chunk: int = 50_000):
        """``J`` by Monte Carlo integration under ``measure``."""
        rng = as_rng(seed)
        J = None
        done = 0
        while done < budget:
            k = min(chunk, budget - done)
            vals = np.asarray(func(measure.sample(k, rng)), dtype=np.complex128)
            part = vals.T @ vals.conj()
            J = part if J is None else J + part
            done += k
        J = J / budget
        return cls(func, 0.5 * (J + J.conj().T), diagonal=False)


# ---------------------------------------------------------------------------
# oracles


class ChristoffelOracle:
    """Suggests i.i.d. draws from ``rho_m dmu`` by rejection against ``mu``."""

    kind = "christoffel"

    def __init__(self, basis: Basis, m: int, measure: Measure, bound: Optional[float] = None):
        self.basis, self.m, self.measure = basis, m, measure
        self.bound = bound if bound is not None else basis.christoffel_sup(m)
        if self.bound is None:
            raise ValueError("Christoffel oracle needs a sup bound (basis.theta or explicit)")

    def batches(self, rng, size):
        while True:
            x = self.measure.sample(size * 2, rng)
            rho = self.basis.christoffel(x, self.m)
            keep = x[rng.random(x.shape[0]) * self.bound < rho]
            if keep.shape[0]:
                yield keep


class CandidateOracle:
    """Iterates a finite candidate list in seeded random order, pass after pass.

    A full pass without any acceptance means no listed point can be accepted
    any more (the state did not change), so the oracle stops.
    """

    kind = "candidate-list"

    def __init__(self, candidates):
        self.candidates = np.asarray(candidates, dtype=float)
        if self.candidates.ndim == 1:
            self.candidates = self.candidates.reshape(-1, 1)
        self._accepted_in_pass = True

    def note_acceptance(self):
        self._accepted_in_pass = True

    def batches(self, rng, size):
        while self._accepted_in_pass:
            self._accepted_in_pass = False
            order = rng.permutation(self.candidates.shape[0])
            for start in range(0, order.size, size):
                yield self.candidates[order[start:start + size]]


# ---------------------------------------------------------------------------
# configuration and result


@dataclass
class GreedyConfig:
    m: int
    n: int
    a_basis: Basis
    b_family: AuxFamily
    oracle: object
    delta: Optional[float] = None
    zeta: Optional[float] = None
    weight_mode: str = "min"
    max_suggestions: int = 1_000_000
    batch_size: int = 32

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < self.m:
            raise ValueError(f"n={self.n} < m={self.m}: the lower barrier cannot move")
        if self.weight_mode not in ("min", "max"):
            raise ValueError("weight_mode is 'min' or 'max'")
        J_max = self.b_family.lambda_max()
        if J_max <= 0:
            raise ValueError("J must be non-zero")
        if self.delta is None:
            self.delta = self.delta_star
        if self.zeta is None:
            self.zeta = self.zeta_star
        if not 0 < self.delta <= self.delta_star * (1 + 1e-12):
            raise ValueError(f"delta must lie in (0, {self.delta_star}]")
        if self.zeta < self.zeta_star * (1 - 1e-12):
            raise ValueError(f"zeta must be >= {self.zeta_star}")

    @property
    def r(self):
        return math.sqrt(self.m / (self.n + 1))

    @property
    def sigma(self):
        return math.sqrt(self.b_family.lambda_max())

    @property
    def s(self):
        return math.sqrt(self.b_family.trace() / self.n)

    @property
    def delta_star(self):
        return (1 - self.r) / (self.n + 1)

    @property
    def zeta_star(self):
        return (self.sigma + self.s) / (self.sigma * self.n)

    @property
    def lower_target(self):
        """Claimed lower bound for ``sum w a a^*``."""
        return (self.n + 1) * self.delta

    @property
    def upper_target(self):
        """Claimed upper bound for ``sum w b b^*``."""
        return self.n * self.zeta * self.sigma ** 2 + self.s * (self.sigma + self.s)


@dataclass
class GreedyResult:
    design: SampledDesign
    certificate: SpectralCertificate
    b_lambda_max: float
    lower_target: float
    upper_target: float
    suggestions: int
    barrier_margins: list = field(default_factory=list)
    weight_intervals: list = field(default_factory=list)
    r: float = 0.0

    @property
    def g0(self):
        return self.r * (1.0 - self.r)

    @property
    def acceptance_rate(self):
        return len(self.design) / self.suggestions

    @property
    def state_lambda_min(self):
        """Smallest eigenvalue of the barrier state ``g0 I + sum w a a^*``."""
        return self.certificate.lambda_min + self.g0

    @property
    def lower_ok(self):
        # the potential argument controls the accumulated state, not the bare sum
        return self.state_lambda_min >= self.lower_target * (1 - 1e-9)

    @property
    def sum_lower_bound(self):
        """Bound implied for ``sum w a a^*`` alone: ``(n+1) delta - g0``."""
        return self.lower_target - self.g0

    @property
    def stability_bound(self):
        """``1 / (1 - r)`` with ``r = sqrt(m / (n + 1))``."""
        return 1.0 / (1.0 - self.r)

    @property
    def stability_ok(self):
        return self.certificate.stability_K <= self.stability_bound * (1 + 1e-9)

    @property
    def upper_ok(self):
        return self.b_lambda_max <= self.upper_target * (1 + 1e-9)

    def as_dict(self):
        return {
            **self.certificate.as_dict(),
            "b_lambda_max": self.b_lambda_max,
            "lower_target": self.lower_target,
            "upper_target": self.upper_target,
            "state_lambda_min": self.state_lambda_min,
            "lower_ok": bool(self.lower_ok),
            "upper_ok": bool(self.upper_ok),
            "stability_bound": self.stability_bound,
            "stability_ok": bool(self.stability_ok),
            "suggestions": self.suggestions,
            "acceptance_rate": self.acceptance_rate,
        }


# ---------------------------------------------------------------------------
# barriers


class _LowerBarrier:
    """Tracks ``G`` (m x m) and evaluates ``V``."""

    def __init__(self, m, g0):
        self.G = g0 * np.eye(m, dtype=np.complex128)

    def margin(self, ell):
        return float(np.linalg.eigvalsh(self.G)[0] - ell)

    def V(self, ell, delta):
        g, Q = np.linalg.eigh(self.G)
        x0 = g - ell
        x1 = x0 - delta
        if x1.min() <= 0:
            raise FloatingPointError("lower barrier would cross the spectrum")
        tr = np.sum(delta / (x0 * x1))
        diag = 1.0 / (x1 * x1 * tr) - 1.0 / x1
        return (Q * diag) @ Q.conj().T

    def add(self, w, a):
        self.G += w * np.outer(a, a.conj())

    def gram(self, g0):
        return self.G - g0 * np.eye(self.G.shape[0])


class _UpperBarrierDiag:
    """Upper barrier for diagonal ``J`` via the Woodbury identity.

    ``u J - Gamma = D_u - X Omega X^*`` with ``D_u = u J + s(sigma+s)``.
    """

    def __init__(self, j, c0):
        self.j = np.asarray(j, dtype=float)
        self.c0 = c0
        self.X = np.zeros((self.j.size, 0), dtype=np.complex128)
        self.w = np.zeros(0)

    def _parts(self, u):
        d = u * self.j + self.c0
        E = self.X / d[:, None]
        S = np.diag(1.0 / self.w) - self.X.conj().T @ E if self.w.size else np.zeros((0, 0))
        return d, E, S

    def margin(self, u):
        """Smallest eigenvalue of the Schur complement (> 0 iff PD)."""
        if not self.w.size:
            return float((u * self.j + self.c0).min())
        _, _, S = self._parts(u)
        return float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0])

    def prepare(self, u, zeta):
        j = self.j
        d0, E0, S0 = self._parts(u)
        d1, E1, S1 = self._parts(u + zeta)
        # Tr(J U_u) - Tr(J U_{u+zeta}) with the diagonal part differenced termwise
        tr = np.sum(j * zeta * j / (d0 * d1))
        if self.w.size:
            tr += np.real(np.trace(np.linalg.solve(S0, (E0.conj().T * j) @ E0)))
            tr -= np.real(np.trace(np.linalg.solve(S1, (E1.conj().T * j) @ E1)))
            S1_fac = linalg.cho_factor(0.5 * (S1 + S1.conj().T))
        else:
            S1_fac = None

        def quad(Bb):
            # v = U_{u+zeta} b for every row b of Bb
            v = Bb.T / d1[:, None]
            if S1_fac is not None:
                v = v + E1 @ linalg.cho_solve(S1_fac, E1.conj().T @ Bb.T)
            bUb = np.real(np.sum(Bb.T.conj() * v, axis=0))
            bUJUb = np.sum(j[:, None] * np.abs(v) ** 2, axis=0)
            return bUJUb / tr + bUb

        return quad

    def add(self, w, b):
        self.X = np.concatenate([self.X, b.reshape(-1, 1)], axis=1)
        self.w = np.append(self.w, w)

    def lambda_max(self):
        if not self.w.size:
            return 0.0
        sw = np.sqrt(self.w)
        K = (self.X * sw).conj().T @ (self.X * sw)
        return float(np.linalg.eigvalsh(0.5 * (K + K.conj().T))[-1])


class _UpperBarrierDense:
    """Upper barrier for a general Hermitian ``J`` by dense factorizations."""

    def __init__(self, J, c0):
        self.J = np.asarray(J, dtype=np.complex128)
        self.Gamma = -c0 * np.eye(self.J.shape[0], dtype=np.complex128)
        self.c0 = c0

    def margin(self, u):
        M = u * self.J - self.Gamma
        return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])

    def prepare(self, u, zeta):
        U0 = np.linalg.inv(u * self.J - self.Gamma)
        U1 = np.linalg.inv((u + zeta) * self.J - self.Gamma)
        tr = float(np.real(np.trace(self.J @ U0) - np.trace(self.J @ U1)))
        Wm = U1 @ self.J @ U1 / tr + U1
        Wm = 0.5 * (Wm + Wm.conj().T)

        def quad(Bb):
            return np.real(np.sum(Bb.conj() * (Bb @ Wm.T), axis=1))

        return quad

    def add(self, w, b):
        self.Gamma += w * np.outer(b, b.conj())

    def lambda_max(self):
        M = self.Gamma + self.c0 * np.eye(self.J.shape[0])
        return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[-1])


# ---------------------------------------------------------------------------
# algorithm


def bss_subsample(config: GreedyConfig, measure: Optional[Measure] = None, seed=None) -> GreedyResult:
    """Greedy construction of ``n`` points and weights.

    Each suggested ``x`` is accepted iff ``a(x)^* V a(x) >= b(x)^* W b(x)``;
    ``1/w`` is the left value (``weight_mode="min"``) or the right value
    (``"max"``). Candidates arrive in batches and the first acceptable one in
    suggestion order is taken; later suggestions of the same batch are kept
    for the next step.

    Returns
    -------
    GreedyResult
        Design plus the spectral certificate of ``sum w a a^*`` and the
        largest eigenvalue of ``sum w b b^*``.

    Raises
    ------
    OracleExhausted
        When ``max_suggestions`` is reached or a candidate list is used up.
    """
    cfg = config
    rng = as_rng(seed)
    m, n = cfg.m, cfg.n
    r, sigma, s = cfg.r, cfg.sigma, cfg.s
    g0 = r * (1 - r)
    c0 = s * (sigma + s)
    lower = _LowerBarrier(m, g0)
    fam = cfg.b_family
    upper = _UpperBarrierDiag(fam.J, c0) if fam.diagonal else _UpperBarrierDense(fam.J, c0)
    ell = u = 0.0
    points, weights, margins, intervals = [], [], [], []
    suggestions = 0
    batches = cfg.oracle.batches(rng, cfg.batch_size)
    pending = None
    while len(points) < n:
        V = lower.V(ell, cfg.delta)
        quad_b = upper.prepare(u, cfg.zeta)
        accepted = False
        while not accepted:
            if pending is not None and pending.shape[0]:
                X, pending = pending, None
            else:
                try:
                    X = next(batches)
                except StopIteration:
                    raise OracleExhausted(f"candidate list exhausted after {len(points)} of {n} points") from None
            X = X[: max(0, cfg.max_suggestions - suggestions)]
            if X.shape[0] == 0:
                raise OracleExhausted(f"{cfg.max_suggestions} suggestions gave only {len(points)} of {n} points")
            A = cfg.a_basis.prefix(X, m)
            left = np.real(np.sum(A.conj() * (A @ V.T), axis=1))
            right = quad_b(fam(X))
            ok = np.flatnonzero((left >= right) & (left > 0) & (right > 0))
            if ok.size == 0:
                suggestions += X.shape[0]
                continue
            i = int(ok[0])
            suggestions += i + 1
            pending = X[i + 1:]
            accepted = True
        w = 1.0 / (left[i] if cfg.weight_mode == "min" else right[i])
        lower.add(w, A[i])
        upper.add(w, fam(X[i:i + 1])[0])
        ell += cfg.delta
        u += cfg.zeta
        points.append(X[i])
        weights.append(w)
        intervals.append((float(right[i]), float(1.0 / w), float(left[i])))
        margins.append((lower.margin(ell), upper.margin(u)))
        if hasattr(cfg.oracle, "note_acceptance"):
            cfg.oracle.note_acceptance()
    design = SampledDesign(np.array(points), np.array(weights))
    cert = SpectralCertificate.from_matrix(lower.gram(g0))
    return GreedyResult(design, cert, upper.lambda_max(), cfg.lower_target, cfg.upper_target,
                        suggestions, margins, intervals, cfg.r)


def greedy_christoffel_config(basis: Basis, m: int, n: int, measure: Measure, b_family: AuxFamily, **kw):
    return GreedyConfig(m, n, basis, b_family, ChristoffelOracle(basis, m, measure), **kw)


def rkhs_tail_config(basis: Basis, m: int, n: int, alpha0: float, t: float, theta: float,
                     measure: Optional[Measure] = None, oracle=None, N_cap: int = 200_000, **kw) -> GreedyConfig:
    """Truncated tail configuration for least squares with fixed ``alpha0``.

    ``N = ceil(m^{alpha0/(alpha0-theta)} - m)``,
    ``c = m^{-t} + sqrt(sum_{k=m}^{N} k^{-2t} / (2m))``,
    ``a = (b_0..b_{m-1})`` and ``b = (c, k^{-t} b_k)_{m <= k < N}``.
    """
    if not (alpha0 > t > theta >= 0.5):
        raise ValueError("need alpha0 > t > theta >= 1/2")
    if basis.theta is None and basis.christoffel_sup(m) is None:
        raise ValueError("basis needs a sup-norm bound")
    N = tail_length(m, alpha0, theta)
    if N > N_cap:
        raise DimensionOverflow(f"N={N} exceeds cap {N_cap}")
    if basis.dim is not None and N > basis.dim:
        raise DimensionOverflow(f"N={N} exceeds basis dimension {basis.dim}")
    k = np.arange(m, N + 1, dtype=float)
    c = m ** (-t) + math.sqrt(math.fsum(k ** (-2 * t)) / (2 * m))
    idx = np.arange(m, N)
    fam = AuxFamily.tail(basis, idx, idx.astype(float) ** (-t), constant=c)
    if oracle is None:
        oracle = ChristoffelOracle(basis, m, measure or Measure.uniform(basis.domain))
    return GreedyConfig(m, n, basis, fam, oracle, **kw)


def tail_length(m: int, alpha0: float, theta: float) -> int:
    val = m ** (alpha0 / (alpha0 - theta)) - m
    return max(m + 1, int(math.ceil(val - 1e-9 * abs(val))))


def unweighted_subsample(m: int, n: int, a_basis: Basis, measure: Measure, oracle=None, seed=None,
                         max_suggestions: int = 1_000_000):
    """Equal-weight design from the greedy construction with ``b = (1)``.

    The maximal admissible weight is chosen at every step; the weights are
    then replaced by ``1/n``. Returns ``(design, certificate, raw_result)``
    where the certificate is for the equal-weight Gram on ``V_m``.
    """
    if n <= m:
        raise ValueError("need n > m")
    if m == 1 and oracle is None:
        x = measure.sample(1, as_rng(seed))
        design = SampledDesign(x, np.ones(1))
        return design, SpectralCertificate.from_matrix(np.abs(a_basis.prefix(x, 1)) ** 2 * np.ones((1, 1))), None
    if oracle is None:
        oracle = ChristoffelOracle(a_basis, m, measure)
    cfg = GreedyConfig(m, n, a_basis, AuxFamily.constant(1.0), oracle, weight_mode="max",
                       max_suggestions=max_suggestions)
    res = bss_subsample(cfg, measure, seed)
    design = SampledDesign.equal_weights(res.design.points)
    B = a_basis.prefix(design.points, m)
    cert = SpectralCertificate.from_matrix(B.conj().T @ B / n)
    return design, cert, res
