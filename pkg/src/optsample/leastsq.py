"""Weighted least squares on a basis prefix and spectral diagnostics.

The least-squares operator maps samples ``y_i = f(x_i)`` to the minimizer of
``sum_i w_i |y_i - g(x_i)|^2`` over ``g`` in ``V_m = span{b_0..b_{m-1}}``.
It is computed from an SVD of the ``sqrt(w)``-scaled evaluation matrix, never
from explicit normal equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Basis, Measure, SampledDesign, TargetFunction, TrigBasis, as_rng, trig_frequency
from ._kernels import trig_poly_eval

DEFAULT_TOL = 1e-10


class IllPosedDesign(ValueError):
    """The design does not give a discretization inequality on ``V_m``."""


@dataclass(frozen=True)
class SpectralCertificate:
    """Extreme eigenvalues of a Gram matrix.

    ``stability_K`` is ``lambda_min^{-1/2}`` (``inf`` when ``lambda_min <= 0``).
    """

    lambda_min: float
    lambda_max: float

    @property
    def stability_K(self) -> float:
        if self.lambda_min <= 0:
            return math.inf
        return self.lambda_min ** -0.5

    @property
    def singular(self) -> bool:
        return self.lambda_min <= 0

    def as_dict(self):
        K = self.stability_K
        return {
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "stability_K": None if math.isinf(K) else K,
            "singular": self.singular,
        }

    @classmethod
    def from_matrix(cls, G):
        ev = np.linalg.eigvalsh(G)
        return cls(float(ev[0]), float(ev[-1]))


def design_matrix(design: SampledDesign, basis: Basis, m: int) -> np.ndarray:
    """``B[i, k] = b_k(x_i)`` for ``k < m``."""
    return basis.prefix(design.points, m)


def gram(design: SampledDesign, basis: Basis, m: int) -> np.ndarray:
    """``G[j, k] = sum_i w_i b_k(x_i) conj(b_j(x_i))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    M = np.sqrt(design.weights)[:, None] * design_matrix(design, basis, m)
    G = M.conj().T @ M
    return 0.5 * (G + G.conj().T)


class FittedApproximant:
    """``g = sum_{k<m} c_k b_k`` together with the design that produced it."""

    def __init__(self, coefficients, basis: Basis, design: SampledDesign | None = None):
        self.coefficients = np.asarray(coefficients, dtype=np.complex128)
        self.basis = basis
        self.design = design

    @property
    def m(self):
        return self.coefficients.size

    def __call__(self, x):
        if isinstance(self.basis, TrigBasis) and self.m > 0:
            # fold the index order into a contiguous frequency band
            freqs = trig_frequency(np.arange(self.m))
            fmin = int(freqs.min())
            band = np.zeros(int(freqs.max()) - fmin + 1, dtype=np.complex128)
            band[freqs - fmin] = self.coefficients
            return trig_poly_eval(np.asarray(x, dtype=float).reshape(-1), fmin, band)
        return self.basis.prefix(x, self.m) @ self.coefficients


class LeastSquaresSolver:
    """Factorized least-squares operator for a fixed design and ``V_m``.

    Construct once, then call :meth:`solve` for any number of value vectors.
    """

    def __init__(self, design: SampledDesign, basis: Basis, m: int, tol: float = DEFAULT_TOL):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.design, self.basis, self.m = design, basis, m
        if len(design) < m:
            raise IllPosedDesign(f"{len(design)} points cannot determine a {m}-dimensional space")
        self._sw = np.sqrt(design.weights)
        M = self._sw[:, None] * design_matrix(design, basis, m)
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
        ratio = (s[-1] / s[0]) ** 2 if s[0] > 0 else 0.0
        if not ratio > tol:
            raise IllPosedDesign(f"lambda_min/lambda_max = {ratio:.3e} is below {tol:g}")
        self._U, self._s, self._Vh = U, s, Vh
        self.certificate = SpectralCertificate(float(s[-1] ** 2), float(s[0] ** 2))

    def solve_coefficients(self, values) -> np.ndarray:
        y = np.asarray(values, dtype=np.complex128)
        rhs = self._U.conj().T @ (self._sw[:, None] * y.reshape(len(self._sw), -1))
        c = self._Vh.conj().T @ (rhs / self._s[:, None])
        return c.reshape((self.m,) + y.shape[1:])

    def solve(self, values) -> FittedApproximant:
        return FittedApproximant(self.solve_coefficients(values), self.basis, self.design)


def fit(values, design: SampledDesign, basis: Basis, m: int, tol: float = DEFAULT_TOL) -> FittedApproximant:
    """Weighted least-squares fit on ``V_m``.

    Raises
    ------
    IllPosedDesign
        If ``lambda_min(G) / lambda_max(G) <= tol``.
    """
    return LeastSquaresSolver(design, basis, m, tol).solve(values)


def stability_constant(design: SampledDesign, basis: Basis, m: int) -> SpectralCertificate:
    return SpectralCertificate.from_matrix(gram(design, basis, m))


def hyperinterpolate(values, design: SampledDesign, basis: Basis, m: int) -> FittedApproximant:
    """``c_k = sum_i w_i f(x_i) conj(b_k(x_i))``."""
    B = design_matrix(design, basis, m)
    y = np.asarray(values, dtype=np.complex128)
    return FittedApproximant(B.conj().T @ (design.weights * y), basis, design)


def check_discretization(design: SampledDesign, basis: Basis, m: int, lower: float, upper: float | None = None,
                         rtol: float = 1e-12):
    """Return ``(ok, certificate)`` with ``ok`` iff ``lower^2 <= lambda_min``
    and, when given, ``lambda_max <= upper^2`` (both up to ``rtol`` round-off)."""
    cert = stability_constant(design, basis, m)
    ok = cert.lambda_min >= lower ** 2 * (1 - rtol)
    if upper is not None:
        ok = ok and cert.lambda_max <= upper ** 2 * (1 + rtol)
    return bool(ok), cert


def lp_error(f, approx, p: float, measure: Measure, mc_budget: int = 100_000, seed=0) -> float:
    """Monte Carlo estimate of ``||f - approx||_p`` under ``measure``.

    ``p = inf`` gives the maximum over the draws.
    """
    x = measure.sample(mc_budget, as_rng(seed))
    diff = np.abs(np.asarray(f(x)).reshape(-1) - np.asarray(approx(x)).reshape(-1))
    if math.isinf(p):
        return float(diff.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(diff ** p) ** (1.0 / p))


def coefficient_l2_error(target: TargetFunction, approx: FittedApproximant) -> float:
    """Exact ``||f - approx||_2`` by Parseval when ``f`` has known coefficients
    over the same orthonormal basis."""
    m = approx.m
    head = target.coefficient_vector(m) - approx.coefficients
    return math.sqrt(float(np.sum(np.abs(head) ** 2)) + target.tail_norm_sq(m))
