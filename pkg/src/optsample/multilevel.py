"""Multilevel Monte Carlo estimation of expansion coefficients.

Level ``s`` draws ``n_s = r 2^s`` points from the Christoffel density of the
first ``m_s = 2^s`` basis functions and adds a plain Monte Carlo estimate of
the current residual's leading ``m_s`` coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .leastsq import FittedApproximant
from .model import Basis, Measure, as_rng
from .random_designs import christoffel_density, sample_density


@dataclass(frozen=True)
class MLConfig:
    r: int
    k: int
    basis: Basis
    measure: Optional[Measure] = None

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("r must be an integer >= 1")
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("k must be an integer >= 0")
        if self.basis.dim is not None and 2 ** self.k > self.basis.dim:
            raise ValueError(f"2^k = {2 ** self.k} exceeds basis dimension {self.basis.dim}")

    def level_sizes(self):
        return [(2 ** s, self.r * 2 ** s) for s in range(self.k + 1)]

    @property
    def total_samples(self):
        return sum(n for _, n in self.level_sizes())


@dataclass
class MLResult:
    approximant: FittedApproximant
    evaluations: int


def level_update(f, coefficients, ms: int, ns: int, basis: Basis, measure: Measure, rng):
    """One level: Monte Carlo estimate of the residual's first ``ms`` coefficients.

    ``coefficients`` is the current prefix (length ``>= ms``); it is not
    modified. Returns the increment of length ``ms``.
    """
    dens = christoffel_density(basis, ms)
    if dens.sup_bound is None:
        raise ValueError(f"Christoffel sampling unavailable for {basis.name} at m={ms}")
    x, rho = sample_density(dens, ns, measure, rng)
    B = basis.prefix(x, ms)
    y = np.asarray(f(x), dtype=np.complex128).reshape(-1)
    resid = y - B @ coefficients[:ms]
    return (B / rho[:, None]).conj().T @ resid / ns


def ml_recover(f, config: MLConfig, seed=None) -> MLResult:
    """Run all levels ``s = 0..k``; returns coefficients on ``b_0..b_{2^k-1}``.

    Residual values at new points always come from the current coefficient
    prefix, never from stored samples of earlier levels.
    """
    rng = as_rng(seed)
    basis = config.basis
    measure = config.measure or Measure.uniform(basis.domain)
    c = np.zeros(2 ** config.k, dtype=np.complex128)
    evals = 0
    for ms, ns in config.level_sizes():
        c[:ms] += level_update(f, c, ms, ns, basis, measure, rng)
        evals += ns
    return MLResult(FittedApproximant(c, basis), evals)


def ml_bound(tail_sq, r: int, k: int) -> float:
    """``r^{-k} sum_{v=-1}^{k} r^v ||f - P_{2^v} f||^2``.

    ``tail_sq(m)`` returns ``||f - P_m f||_2^2``; the ``v = -1`` term uses
    ``m = 0`` (that is ``||f||_2^2``).
    """
    total = tail_sq(0) * r ** -1.0
    for v in range(k + 1):
        total += r ** float(v) * tail_sq(2 ** v)
    return total * r ** float(-k)
