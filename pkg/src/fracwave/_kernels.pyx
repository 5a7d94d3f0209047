# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same call signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

cdef double _EPS = 2.220446049250313e-16
cdef int MAX_ITER = 200


cdef inline double _cubic_minus(double z, double lam, double pq) nogil:
    return z * (z * (z - 3.0) + 2.0 + pq) / pq - lam


cdef inline double _cubic_slope(double z, double pq) nogil:
    return (z * (3.0 * z - 6.0) + 2.0 + pq) / pq


cdef double _solve_one(double lam, double lo, double hi, double pq, bint increasing) nogil:
    cdef double a = lo, b = hi, z, fz, d, zn
    cdef double ra = _cubic_minus(a, lam, pq)
    cdef double rb = _cubic_minus(b, lam, pq)
    cdef int it
    if ra == 0.0:
        return lo
    if rb == 0.0:
        return hi
    if rb != ra:
        z = a - ra * (b - a) / (rb - ra)
    else:
        z = 0.5 * (a + b)
    if z < a:
        z = a
    if z > b:
        z = b
    for it in range(MAX_ITER):
        fz = _cubic_minus(z, lam, pq)
        if fz == 0.0:
            return z
        if (fz < 0.0) == increasing:
            a = z
        else:
            b = z
        d = _cubic_slope(z, pq)
        zn = z - fz / d
        if not isfinite(zn) or zn <= a or zn >= b:
            zn = 0.5 * (a + b)
        if fabs(zn - z) <= 2.0 * _EPS * fabs(zn):
            return zn
        if b - a <= 2.0 * _EPS * max(fabs(a), fabs(b)):
            return zn
        z = zn
    return z


def invert_cubic(lam, double lo, double hi, double pq):
    cdef cnp.ndarray[cnp.double_t, ndim=1] src = np.ascontiguousarray(lam, dtype=float).ravel()
    cdef cnp.ndarray[cnp.double_t, ndim=1] out = np.empty_like(src)
    cdef Py_ssize_t i, n = src.shape[0]
    cdef bint increasing = _cubic_minus(hi, 0.0, pq) > _cubic_minus(lo, 0.0, pq)
    with nogil:
        for i in range(n):
            out[i] = _solve_one(src[i], lo, hi, pq, increasing)
    return out.reshape(np.shape(lam))


def extend(values, z, double p):
    cdef cnp.ndarray[cnp.double_t, ndim=2] v = np.ascontiguousarray(values, dtype=float)
    cdef cnp.ndarray[cnp.double_t, ndim=1] zz = np.ascontiguousarray(z, dtype=float).ravel()
    cdef Py_ssize_t m = v.shape[0], n_old = v.shape[1]
    cdef cnp.ndarray[cnp.double_t, ndim=2] out = np.empty((m, 3 * (n_old - 1) + 1))
    cdef Py_ssize_t r, i
    cdef double q = 1.0 - p, denom, own, other, x0, x1
    with nogil:
        for r in range(m):
            denom = (1.0 - p - zz[r]) * (1.0 + p - zz[r])
            own = q * (1.0 - zz[r]) / denom
            other = p * q / denom
            for i in range(n_old - 1):
                x0 = v[r, i]
                x1 = v[r, i + 1]
                out[r, 3 * i] = x0
                out[r, 3 * i + 1] = own * x0 + other * x1
                out[r, 3 * i + 2] = own * x1 + other * x0
            out[r, 3 * (n_old - 1)] = v[r, n_old - 1]
    return out


def laplacian(values, to_right, to_left):
    cdef cnp.ndarray[cnp.double_t, ndim=2] v = np.ascontiguousarray(values, dtype=float)
    cdef cnp.ndarray[cnp.double_t, ndim=1] a = np.ascontiguousarray(to_right, dtype=float)
    cdef cnp.ndarray[cnp.double_t, ndim=1] b = np.ascontiguousarray(to_left, dtype=float)
    cdef Py_ssize_t m = v.shape[0], n = v.shape[1], r, i
    cdef cnp.ndarray[cnp.double_t, ndim=2] out = np.empty((m, n))
    cdef double acc
    with nogil:
        for r in range(m):
            for i in range(n):
                acc = v[r, i]
                if i + 1 < n:
                    acc = acc - a[i] * v[r, i + 1]
                if i > 0:
                    acc = acc - b[i] * v[r, i - 1]
                out[r, i] = acc
    return out
