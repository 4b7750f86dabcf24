"""Square-root Lasso over a bounded orthonormal system and brute-force RIP
verification at desk scale.

The estimator minimizes ``||z||_1 + lam * ||B z - y||_2`` with
``B = (b_j(x_i))``; the default ``lam = 2 sqrt(m / n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import Basis, SampledDesign


class NonConvergence(RuntimeError):
    """The iteration cap was reached before the duality gap closed."""


class CombinatorialBudgetExceeded(ValueError):
    """Too many supports to enumerate."""


@dataclass
class SparseProblem:
    basis: Basis
    N: int
    design: SampledDesign
    lam: Optional[float] = None
    m: Optional[int] = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.lam is None:
            if self.m is None:
                raise ValueError("give lam or the sparsity m")
            self.lam = default_lambda(self.m, len(self.design))
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return self.basis.prefix(self.design.points, self.N)


def default_lambda(m: int, n: int) -> float:
    return 2.0 * math.sqrt(m / n)


def sqrt_lasso_objective(z, B, y, lam) -> float:
    return float(np.sum(np.abs(z)) + lam * np.linalg.norm(B @ z - y))


@dataclass
class LassoResult:
    coefficients: np.ndarray
    objective: float
    gap: float
    iterations: int
    history: list = field(default_factory=list)


def _soft(z, tau):
    mag = np.abs(z)
    scale = np.where(mag > tau, 1.0 - tau / np.maximum(mag, 1e-300), 0.0)
    return z * scale


def sqrt_lasso(values, problem: SparseProblem, solver_tol: float = 1e-8, max_iter: int = 200_000,
               check_every: int = 50) -> LassoResult:
    """Primal-dual hybrid gradient iteration.

    The dual feasible point is the scaled dual iterate, so the reported
    ``gap`` bounds the suboptimality of the returned coefficients. The
    returned iterate is the best one seen, hence ``history`` (objective at
    each check) is non-increasing.

    Raises
    ------
    NonConvergence
        If the relative gap stays above ``solver_tol`` after ``max_iter``.
    """
    B = problem.matrix
    y = np.asarray(values, dtype=np.complex128).ravel()
    lam = problem.lam
    N = B.shape[1]
    L = np.linalg.norm(B, 2)
    tau = sigma = 0.99 / L
    z = np.zeros(N, dtype=np.complex128)
    zbar = z.copy()
    p = np.zeros(B.shape[0], dtype=np.complex128)
    best = (sqrt_lasso_objective(z, B, y, lam), z.copy())
    history = [best[0]]
    gap = math.inf
    for it in range(1, max_iter + 1):
        q = p + sigma * (B @ zbar) - sigma * y
        nq = np.linalg.norm(q)
        p = q if nq <= lam else q * (lam / nq)
        z_new = _soft(z - tau * (B.conj().T @ p), tau)
        zbar = 2 * z_new - z
        z = z_new
        if it % check_every == 0 or it == max_iter:
            obj = sqrt_lasso_objective(z, B, y, lam)
            if obj < best[0]:
                best = (obj, z.copy())
            history.append(best[0])
            dual_scale = max(1.0, float(np.abs(B.conj().T @ p).max()))
            dual = -float(np.real(np.vdot(p / dual_scale, y)))
            gap = best[0] - dual
            if gap <= solver_tol * max(1.0, best[0]):
                return LassoResult(best[1], best[0], gap, it, history)
    raise NonConvergence(f"gap {gap:.3e} after {max_iter} iterations")


def rip_check(design: SampledDesign, basis: Basis, N: int, sparsity: int, lower: float = 0.75,
              upper: float = 1.25, max_supports: int = 5_000_000, chunk: int = 50_000) -> bool:
    """Brute-force restricted isometry check of ``(1/sqrt n) (b_j(x_i))``.

    True iff every principal ``sparsity x sparsity`` submatrix of the
    normalized Gram matrix has its spectrum in ``[lower, upper]``.
    """
    if sparsity < 1 or sparsity > N:
        raise ValueError("need 1 <= sparsity <= N")
    total = math.comb(N, sparsity)
    if total > max_supports:
        raise CombinatorialBudgetExceeded(f"C({N}, {sparsity}) = {total} supports exceed {max_supports}")
    n = len(design)
    A = basis.prefix(design.points, N) / math.sqrt(n)
    M = A.conj().T @ A
    combos = itertools.combinations(range(N), sparsity)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            return True
        S = block.reshape(-1, sparsity)
        sub = M[S[:, :, None], S[:, None, :]]
        ev = np.linalg.eigvalsh(sub)
        if ev[:, 0].min() < lower or ev[:, -1].max() > upper:
            return False
