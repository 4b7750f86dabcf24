"""Synthetic target functions with known structure.

Series targets carry their exact coefficients, so L2 errors of coefficient
approximations are available by Parseval.
"""

from __future__ import annotations

import numpy as np

from .model import Basis, TargetFunction, TrigBasis, TrigSeries, as_rng


def series(basis: Basis, indices, coefficients, name="series") -> TargetFunction:
    indices = np.asarray(indices, dtype=np.int64)
    coefficients = np.asarray(coefficients, dtype=np.complex128)
    if isinstance(basis, TrigBasis):
        return TrigSeries(indices, coefficients, name)

    def ev(x):
        return basis.matrix(x, indices) @ coefficients

    return TargetFunction(ev, basis, indices, coefficients, name)


def _phases(rng, k):
    return np.exp(2j * np.pi * rng.random(k))


def prescribed_tail(alpha: float, K: int = 4096, seed=0, basis: Basis | None = None) -> TargetFunction:
    """Series with ``||f - P_m f||_2^2 = m^{-2 alpha} - K^{-2 alpha}`` for ``1 <= m <= K``.

    ``|c_0| = 1`` and ``|c_k|^2 = k^{-2 alpha} - (k+1)^{-2 alpha}``, with
    random phases.
    """
    basis = basis or TrigBasis()
    rng = as_rng(seed)
    k = np.arange(K, dtype=float)
    mag2 = np.empty(K)
    mag2[0] = 1.0
    mag2[1:] = k[1:] ** (-2 * alpha) - (k[1:] + 1) ** (-2 * alpha)
    return series(basis, np.arange(K), np.sqrt(mag2) * _phases(rng, K), f"prescribed-tail({alpha})")


def trig_decay(alpha: float, K: int = 4096, seed=0) -> TargetFunction:
    """``c_k = max(k, 1)^{-alpha - 1/2}`` times random signs on the trig basis."""
    rng = as_rng(seed)
    k = np.arange(K, dtype=float)
    signs = rng.choice([-1.0, 1.0], size=K)
    return TrigSeries(np.arange(K), signs * np.maximum(k, 1.0) ** (-alpha - 0.5), f"trig-decay({alpha})")


def rkhs_random(sigmas, seed=0, basis: Basis | None = None) -> TargetFunction:
    """``f = sum_k sigma_k xi_k b_k`` with ``xi`` uniform in the complex unit ball."""
    basis = basis or TrigBasis()
    sigmas = np.asarray(sigmas, dtype=float)
    rng = as_rng(seed)
    K = sigmas.size
    xi = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    xi *= rng.random() ** (1.0 / (2 * K)) / np.linalg.norm(xi)
    return series(basis, np.arange(K), sigmas * xi, "rkhs-random")


def sparse_target(m: int, N: int, seed=0, basis: Basis | None = None) -> TargetFunction:
    """``m`` random coefficients (complex normal) on random indices below ``N``."""
    basis = basis or TrigBasis()
    rng = as_rng(seed)
    idx = np.sort(rng.choice(N, size=m, replace=False))
    vals = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return series(basis, idx, vals, f"sparse({m},{N})")


def lipschitz_hat(center: float = 0.5, width: float = 0.25) -> TargetFunction:
    """``max(0, width - dist(x, center))`` on the circle (1-Lipschitz)."""

    def ev(x):
        x = np.asarray(x, dtype=float).reshape(-1)
        d = np.abs(x - center) % 1.0
        d = np.minimum(d, 1.0 - d)
        return np.maximum(0.0, width - d)

    return TargetFunction(ev, name="lipschitz-hat")


def dyadic_w2inf(eps: float = 0.1, levels: int = 24, seed=0) -> TargetFunction:
    """Function on [0, 1] whose second derivative is bounded but nowhere smoother.

    ``f'' = sum_j s_j 2^{-eps j} r_j`` with Rademacher functions
    ``r_j(x) = (-1)^floor(2^j x)`` and random signs ``s_j``; ``f(0) = f'(0) = 0``.
    """
    rng = as_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=levels)
    amps = signs * 2.0 ** (-eps * np.arange(levels))

    def H(t):
        # second antiderivative of the square wave with period 2, unit step
        u = np.mod(t, 2.0)
        part = np.where(u <= 1.0, 0.5 * u * u, 0.5 + 2.0 * (u - 1.0) - 0.5 * (u * u - 1.0))
        return np.floor(t / 2.0) + part

    def ev(x):
        x = np.asarray(x, dtype=float)
        x = x[:, 0] if x.ndim == 2 else x.reshape(-1)
        out = np.zeros(x.shape)
        for j, a in enumerate(amps):
            T = 2.0 ** -j
            out += a * T * T * H(x / T)
        return out

    return TargetFunction(ev, name=f"dyadic-w2inf({eps})")


TARGET_FAMILIES = {
    "trig-decay": trig_decay,
    "prescribed-tail": prescribed_tail,
    "rkhs-random": rkhs_random,
    "lipschitz-hat": lipschitz_hat,
    "sparse": sparse_target,
    "dyadic-w2inf": dyadic_w2inf,
}
