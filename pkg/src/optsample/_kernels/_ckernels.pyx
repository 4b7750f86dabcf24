# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels. See ``_fallback.py`` for semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs, cos, sin, M_PI

cnp.import_array()


def trig_poly_eval(x, long fmin, coefs):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double complex[::1] c = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef Py_ssize_t n = xv.shape[0], K = c.shape[0], i, j
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex z, zk, acc
    cdef double ph
    for i in range(n):
        ph = xv[i]
        ph = ph - floor(ph)
        z = cos(2.0 * M_PI * ph) + 1j * sin(2.0 * M_PI * ph)
        ph = fmin * ph
        ph = ph - floor(ph)
        zk = cos(2.0 * M_PI * ph) + 1j * sin(2.0 * M_PI * ph)
        acc = 0
        for j in range(K):
            acc = acc + c[j] * zk
            zk = zk * z
        o[i] = acc
    return out


def circle_envelope(query, pts, vals):
    cdef double[::1] q = np.ascontiguousarray(query, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t nq = q.shape[0], n = p.shape[0], i, j
    upper = np.empty(nq)
    lower = np.empty(nq)
    cdef double[::1] up = upper
    cdef double[::1] lo = lower
    cdef double d, hi, lw, t
    for i in range(nq):
        hi = 1e300
        lw = -1e300
        for j in range(n):
            d = fabs(q[i] - p[j])
            d = d - floor(d)
            if d > 0.5:
                d = 1.0 - d
            t = v[j] + d
            if t < hi:
                hi = t
            t = v[j] - d
            if t > lw:
                lw = t
        up[i] = hi
        lo[i] = lw
    return upper, lower


def min_distance(query, pts, bint chebyshev=False):
    cdef double[:, ::1] q = np.ascontiguousarray(query, dtype=np.float64)
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t nq = q.shape[0], n = p.shape[0], d = q.shape[1], i, j, k
    out = np.empty(nq)
    cdef double[::1] o = out
    cdef double best, acc, t
    for i in range(nq):
        best = 1e300
        for j in range(n):
            acc = 0.0
            for k in range(d):
                t = fabs(q[i, k] - p[j, k])
                if chebyshev:
                    if t > acc:
                        acc = t
                else:
                    acc += t * t
            if acc < best:
                best = acc
        o[i] = best if chebyshev else sqrt(best)
    return out


def cells_occupied(points, corner, double side, long k):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(corner, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, a
    cdef long total = 1
    for a in range(d):
        total *= k
    if n < total:
        return False
    seen_arr = np.zeros(total, dtype=np.uint8)
    cdef unsigned char[::1] seen = seen_arr
    cdef long flat, idx, count = 0
    cdef double scale = k / side
    cdef bint ok
    for i in range(n):
        flat = 0
        ok = True
        for a in range(d):
            idx = <long>floor((p[i, a] - c[a]) * scale)
            if idx < 0 or idx >= k:
                ok = False
                break
            flat = flat * k + idx
        if ok and not seen[flat]:
            seen[flat] = 1
            count += 1
            if count == total:
                return True
    return False
