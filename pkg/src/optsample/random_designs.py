"""Random designs: i.i.d. density sampling, conditional Christoffel sampling
and the randomized greedy construction with minimal oversampling.

All draws come from an explicit ``numpy.random.Generator``. Densities are
relative to the reference measure and sampled by rejection against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .leastsq import SpectralCertificate, gram
from .model import Basis, Measure, SampledDesign, as_rng


class DegenerateTail(ValueError):
    """The tail ``sum_{k>=m} sigma_k^2`` vanishes."""


class RejectionBudgetExceeded(RuntimeError):
    """Rejection sampling used up its proposal budget."""


class RedrawCapExceeded(RuntimeError):
    """Conditional sampling failed the spectral test too often."""


@dataclass(frozen=True)
class DensitySpec:
    """A probability density ``rho`` w.r.t. ``mu`` with a sup bound."""

    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    sup_bound: Optional[float]

    def __call__(self, x):
        return self.eval(x)


def flat_density() -> DensitySpec:
    return DensitySpec("flat", lambda x: np.ones(np.asarray(x).shape[0]), 1.0)


def christoffel_density(basis: Basis, m: int, bound: Optional[float] = None) -> DensitySpec:
    """``rho_m(x) = (1/m) sum_{k<m} |b_k(x)|^2``."""
    if basis.dim is not None and m > basis.dim:
        raise ValueError(f"m={m} exceeds basis dimension {basis.dim}")
    sup = bound if bound is not None else basis.christoffel_sup(m)
    return DensitySpec(f"christoffel({m})", lambda x: basis.christoffel(x, m), sup)


def optimal_rkhs_density(basis: Basis, m: int, sigmas) -> DensitySpec:
    """``(rho_m + sum_{k>=m} sigma_k^2 |b_k|^2 / sum_{k>=m} sigma_k^2) / 2``.

    ``sigmas`` holds ``sigma_0..sigma_{N-1}``; only the tail ``k >= m`` is
    used in the second term.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    tail = sigmas[m:] ** 2
    total = float(tail.sum())
    if total <= 0:
        raise DegenerateTail("sum of tail sigma_k^2 is zero")
    idx = np.arange(m, sigmas.size)
    keep = tail > 0
    idx, tail = idx[keep], tail[keep]
    sup_head = basis.christoffel_sup(m)
    if basis.theta is not None:
        sup_tail = basis.theta ** 2
    else:
        top = int(idx.max()) + 1
        sup_tail = basis.christoffel_sup(top) * top if basis.christoffel_sup(top) is not None else None
    sup = None if sup_head is None or sup_tail is None else 0.5 * (sup_head + sup_tail)

    def ev(x):
        head = basis.christoffel(x, m)
        t = (np.abs(basis.matrix(x, idx)) ** 2) @ tail / total
        return 0.5 * (head + t)

    return DensitySpec(f"optimal-rkhs({m})", ev, sup)


def sample_density(density: DensitySpec, n: int, measure: Measure, rng, budget: Optional[int] = None):
    """``n`` i.i.d. draws from ``density * dmu``; draws with ``rho = 0`` are rejected.

    Returns ``(points, rho_values)``.
    """
    if density.sup_bound is None:
        raise ValueError("density has no sup bound; rejection sampling unavailable")
    budget = budget if budget is not None else max(10_000, 1000 * n * max(1.0, density.sup_bound))
    pts, vals = [], []
    need, used = n, 0
    while need > 0:
        if used >= budget:
            raise RejectionBudgetExceeded(f"{used} proposals gave {n - need} of {n} points")
        k = int(min(max(64, 2 * need * density.sup_bound), budget - used))
        x = measure.sample(k, rng)
        rho = np.asarray(density(x), dtype=float)
        used += k
        keep = (rng.random(k) * density.sup_bound < rho) & (rho > 0)
        pts.append(x[keep][:need])
        vals.append(rho[keep][:need])
        need -= pts[-1].shape[0]
    return np.concatenate(pts), np.concatenate(vals)


def iid_design(density: DensitySpec, n: int, measure: Measure, seed=None) -> SampledDesign:
    """``n`` i.i.d. points from ``rho dmu`` with weights ``1/(n rho(x_i))``."""
    x, rho = sample_density(density, n, measure, as_rng(seed))
    return SampledDesign(x, 1.0 / (n * rho))


def conditional_sample_size(m: int) -> int:
    return int(math.ceil(10 * m * math.log(4 * m)))


@dataclass
class ConditionalResult:
    design: SampledDesign
    certificate: SpectralCertificate
    redraw_count: int


def conditional_christoffel_design(basis: Basis, m: int, seed=None, measure: Optional[Measure] = None,
                                   n: Optional[int] = None, cap: int = 64) -> ConditionalResult:
    """Christoffel design redrawn until ``lambda_min(G) >= 1/2``.

    ``redraw_count`` is the total number of draws, so it is at least 1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = as_rng(seed)
    measure = measure or Measure.uniform(basis.domain)
    n = n if n is not None else conditional_sample_size(m)
    dens = christoffel_density(basis, m)
    for draw in range(1, cap + 1):
        x, rho = sample_density(dens, n, measure, rng)
        design = SampledDesign(x, 1.0 / (n * rho))
        cert = SpectralCertificate.from_matrix(gram(design, basis, m))
        if cert.lambda_min >= 0.5:
            return ConditionalResult(design, cert, draw)
    raise RedrawCapExceeded(f"{cap} draws failed lambda_min >= 1/2")


def dolbeault_chkifa_design(basis: Basis, m: int, n: int, measure: Optional[Measure] = None, seed=None,
                            proposal_budget: int = 10_000_000) -> SampledDesign:
    """Randomized barrier construction with ``n >= m`` points for ``V_m``.

    With ``r = n/(m-1)``, each step moves the barrier ``ell`` by ``1/sqrt(r)``
    and draws ``x`` from the truncated density ``max(b(x)^* W b(x), 0)``
    (by rejection against ``mu`` with bound ``lambda_max(W) m sup rho_m``);
    the weight is ``1/(b(x)^* W b(x))``.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if n < m:
        raise ValueError("n must be >= m")
    rng = as_rng(seed)
    measure = measure or Measure.uniform(basis.domain)
    sup_rho = basis.christoffel_sup(m)
    if sup_rho is None:
        raise ValueError("basis needs a Christoffel sup bound")
    r = n / (m - 1)
    step = 1.0 / math.sqrt(r)
    A = np.zeros((m, m), dtype=np.complex128)
    ell = -float(m)
    points, weights = [], []
    used = 0
    for _ in range(n):
        g, Q = np.linalg.eigh(A)
        y = 1.0 / (g - ell)
        ell += step
        z = 1.0 / (g - ell)
        if np.any(g - ell <= 0):
            raise FloatingPointError("barrier crossed the spectrum")
        wdiag = z * z / (z.sum() - y.sum()) - z
        Wm = (Q * wdiag) @ Q.conj().T
        bound = float(wdiag.max()) * m * sup_rho
        if bound <= 0:
            raise RejectionBudgetExceeded("truncated density vanishes identically")
        while True:
            if used >= proposal_budget:
                raise RejectionBudgetExceeded(f"{used} proposals exhausted")
            x = measure.sample(256, rng)
            used += 256
            B = basis.prefix(x, m)
            rho = np.real(np.sum(B.conj() * (B @ Wm.T), axis=1))
            ok = np.flatnonzero((rng.random(x.shape[0]) * bound < rho) & (rho > 0))
            if ok.size:
                i = int(ok[0])
                break
        w = 1.0 / rho[i]
        A += w * np.outer(B[i], B[i].conj())
        A = 0.5 * (A + A.conj().T)
        points.append(x[i])
        weights.append(w)
    return SampledDesign(np.array(points), np.array(weights))


def dolbeault_chkifa_factor(m: int, n: int) -> float:
    """Error factor ``1 + (1 - 1/sqrt(r))^{-2}`` with ``r = n/(m-1)``."""
    r = n / (m - 1)
    return 1.0 + 1.0 / (1.0 - 1.0 / math.sqrt(r)) ** 2
