"""Pure numpy implementations of the hot kernels.

These are the reference versions; the compiled module in ``_ckernels.pyx``
must agree with them to round-off.
"""

import numpy as np

_CHUNK = 4096


def trig_poly_eval(x, fmin, coefs):
    """Evaluate ``sum_j coefs[j] * exp(2 pi i (fmin + j) x)`` at every ``x``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    coefs = np.ascontiguousarray(coefs, dtype=np.complex128)
    freqs = fmin + np.arange(coefs.size)
    out = np.empty(x.size, dtype=np.complex128)
    for start in range(0, x.size, _CHUNK):
        xs = x[start:start + _CHUNK]
        phase = np.outer(xs, freqs)
        phase -= np.floor(phase)
        out[start:start + _CHUNK] = np.exp(2j * np.pi * phase) @ coefs
    return out


def circle_envelope(query, pts, vals):
    """Upper and lower Lipschitz envelopes on the circle.

    ``upper(x) = min_i vals[i] + dist(x, pts[i])`` and
    ``lower(x) = max_i vals[i] - dist(x, pts[i])`` with the torus distance.
    """
    query = np.ascontiguousarray(query, dtype=np.float64)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    upper = np.empty(query.size)
    lower = np.empty(query.size)
    for start in range(0, query.size, _CHUNK):
        q = query[start:start + _CHUNK]
        d = np.abs(q[:, None] - pts[None, :]) % 1.0
        d = np.minimum(d, 1.0 - d)
        upper[start:start + _CHUNK] = np.min(vals[None, :] + d, axis=1)
        lower[start:start + _CHUNK] = np.max(vals[None, :] - d, axis=1)
    return upper, lower


def min_distance(query, pts, chebyshev=False):
    """Distance from every query row to the nearest row of ``pts``."""
    query = np.ascontiguousarray(query, dtype=np.float64)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    out = np.empty(query.shape[0])
    chunk = max(1, _CHUNK * 64 // max(pts.shape[0], 1))
    for start in range(0, query.shape[0], chunk):
        diff = np.abs(query[start:start + chunk, None, :] - pts[None, :, :])
        if chebyshev:
            d = diff.max(axis=2)
        else:
            d = np.sqrt((diff * diff).sum(axis=2))
        out[start:start + chunk] = d.min(axis=1)
    return out


def cells_occupied(points, corner, side, k):
    """True iff each of the ``k**d`` half-open cells of the cube holds a point.

    The cube is ``corner + [0, side)^d``; points outside it are ignored.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    corner = np.asarray(corner, dtype=np.float64)
    d = points.shape[1]
    rel = (points - corner) * (k / side)
    idx = np.floor(rel).astype(np.int64)
    inside = np.all((idx >= 0) & (idx < k), axis=1)
    idx = idx[inside]
    if idx.shape[0] < k ** d:
        return False
    flat = np.ravel_multi_index(idx.T, (k,) * d)
    return np.unique(flat).size == k ** d
