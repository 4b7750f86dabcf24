"""Closed-form ground truth for 1-Lipschitz functions on the circle.

Everything here depends on a point set only through its gaps, so designs
are normalized to sorted points in ``[0, 1)`` with a wrap-around gap.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import gammaln

from ._kernels import circle_envelope


class InconsistentData(UserWarning):
    """Data values cannot come from a 1-Lipschitz function on the circle."""


class CircleDesign:
    """Sorted points on ``[0, 1)`` and the induced gaps (summing to 1)."""

    def __init__(self, points):
        pts = np.sort(np.mod(np.asarray(points, dtype=float).ravel(), 1.0))
        if pts.size == 0:
            raise ValueError("a circle design needs at least one point")
        self.points = pts
        gaps = np.diff(np.append(pts, pts[0] + 1.0))
        gaps = np.maximum(gaps, 0.0)
        self.gaps = gaps / gaps.sum()

    @classmethod
    def equispaced(cls, n, shift=0.0):
        return cls((np.arange(n) + shift) / n)

    def __len__(self):
        return self.points.size

    def dist(self, x):
        """``dist(x, P)`` with the torus metric."""
        x = np.asarray(x, dtype=float).ravel()
        upper, _ = circle_envelope(x, self.points, np.zeros(self.points.size))
        return upper


def _as_design(design):
    return design if isinstance(design, CircleDesign) else CircleDesign(design)


def exact_radius(design, p: float) -> float:
    """``||dist(., P)||_p`` on the circle, in closed form.

    A gap of length ``g`` contributes ``2 (g/2)^{p+1} / (p+1)`` to the
    ``p``-th power; for ``p = inf`` the result is half the largest gap.
    """
    gaps = _as_design(design).gaps
    if math.isinf(p):
        return 0.5 * float(gaps.max())
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    total = math.fsum(2.0 * (g / 2.0) ** (p + 1) / (p + 1) for g in gaps)
    return total ** (1.0 / p)


def optimal_error(n: int, p: float) -> float:
    """Minimal radius over ``n``-point designs, attained by equispaced points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if math.isinf(p):
        return 1.0 / (2 * n)
    return 0.5 * (1.0 / (1.0 + p)) ** (1.0 / p) / n


def expected_radius(n: int, p: float) -> float:
    """Radius moment for ``n`` i.i.d. uniform points.

    Returns ``(E exact_radius(P, p)^p)^{1/p}`` for finite ``p`` and
    ``E exact_radius(P, inf)`` otherwise. Both reduce to the plain mean for
    ``p = 1``; for ``1 < p < inf`` the plain mean is smaller (Jensen).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if math.isinf(p):
        return math.fsum(1.0 / i for i in range(1, n + 1)) / (2 * n)
    log_ratio = gammaln(n + 1) + gammaln(p + 1) - gammaln(p + n + 1)
    return 0.5 * math.exp(log_ratio / p)


def lipschitz_consistent(design, values, atol: float = 1e-12) -> bool:
    """True iff ``|y_i - y_j| <= dist(x_i, x_j)`` for all pairs."""
    pts = np.asarray(design.points if isinstance(design, CircleDesign) else design, dtype=float).ravel()
    y = np.asarray(values, dtype=float).ravel()
    d = np.abs(pts[:, None] - pts[None, :]) % 1.0
    d = np.minimum(d, 1.0 - d)
    return bool(np.all(np.abs(y[:, None] - y[None, :]) <= d + atol))


class CentralReconstruction:
    """``Phi*(x) = (h+(x) + h-(x)) / 2`` from the Lipschitz envelopes.

    ``consistent`` is False when the data violate the Lipschitz condition;
    the envelopes are still evaluated but no guarantee applies.
    """

    def __init__(self, points, values):
        self.points = np.asarray(points, dtype=float).ravel() % 1.0
        self.values = np.asarray(values, dtype=float).ravel()
        if self.points.size != self.values.size:
            raise ValueError("one value per point expected")
        self.consistent = lipschitz_consistent(self.points, self.values)
        if not self.consistent:
            warnings.warn("data are not 1-Lipschitz on the circle", InconsistentData, stacklevel=2)

    def envelopes(self, x):
        return circle_envelope(np.asarray(x, dtype=float).ravel(), self.points, self.values)

    def __call__(self, x):
        upper, lower = self.envelopes(x)
        return 0.5 * (upper + lower)


def central_reconstruct(design, values) -> CentralReconstruction:
    pts = design.points if isinstance(design, CircleDesign) else design
    return CentralReconstruction(pts, values)
