# cython: language_level=3
"""Compiled per-block kernels.

Same contract and the same floating-point evaluation order as
``_kernels_py``; built without FMA contraction so the results match it
bit for bit.
"""

import numpy as np

from libc.math cimport fabs

BACKEND = "cython"


cdef inline void _acf(double x0, double x1, double x2, double x3, bint full_r1,
                      double* r) noexcept nogil:
    r[0] = (x3 * x3 + x2 * x2 + x1 * x1 + x0 * x0) / 4.0
    if full_r1:
        r[1] = (x3 * x2 + x2 * x1 + x1 * x0) / 3.0
    else:
        r[1] = (x3 * x2 + x1 * x0) / 2.0
    r[2] = (x3 * x1 + x2 * x0) / 2.0
    r[3] = x3 * x0


cdef inline bint _levinson(const double* r, double epsilon, double* a) noexcept nogil:
    """Fill a[0..3] (a[0] = 1) and return True when the block is degenerate."""
    cdef double k1, k2, k3, e1, e2, a1, a2
    a[0] = 1.0
    a[1] = 0.0
    a[2] = 0.0
    a[3] = 0.0
    if not (r[0] > epsilon):
        return True
    k1 = -r[1] / r[0]
    e1 = r[0] * (1.0 - k1 * k1)
    if fabs(e1) < epsilon * r[0]:
        return True
    k2 = -(r[2] + k1 * r[1]) / e1
    a1 = k1 + k2 * k1
    a2 = k2
    e2 = e1 * (1.0 - k2 * k2)
    if fabs(e2) < epsilon * r[0]:
        return True
    k3 = -(r[3] + a1 * r[2] + a2 * r[1]) / e2
    a[1] = a1 + k3 * a2
    a[2] = a2 + k3 * a1
    a[3] = k3
    return False


cdef inline double _energy(const double* r, const double* a) noexcept nogil:
    cdef double total = 0.0
    cdef int i, j, lag
    for i in range(4):
        for j in range(4):
            lag = i - j if i >= j else j - i
            total = total + (a[i] * a[j]) * r[lag]
    return total


def block_fit(xhat, bint full_r1, double epsilon):
    """Fit every 2x2 block of ``xhat``; see ``_kernels_py.block_fit``."""
    cdef const double[:, ::1] x = np.ascontiguousarray(xhat, dtype=np.float64)
    cdef Py_ssize_t bh = x.shape[0] // 2
    cdef Py_ssize_t bw = x.shape[1] // 2

    acf_arr = np.empty((bh, bw, 4), dtype=np.float64)
    coeffs_arr = np.empty((bh, bw, 3), dtype=np.float64)
    b0_arr = np.empty((bh, bw), dtype=np.float64)
    energy_arr = np.empty((bh, bw), dtype=np.float64)
    degenerate_arr = np.empty((bh, bw), dtype=np.uint8)
    secondary_arr = np.empty((bh, bw), dtype=np.float64)

    cdef double[:, :, ::1] acf = acf_arr
    cdef double[:, :, ::1] coeffs = coeffs_arr
    cdef double[:, ::1] b0 = b0_arr
    cdef double[:, ::1] energy = energy_arr
    cdef unsigned char[:, ::1] degenerate = degenerate_arr
    cdef double[:, ::1] secondary = secondary_arr

    cdef Py_ssize_t i, j, u, v
    cdef double x0, x1, x2, x3
    cdef double r[4]
    cdef double a[4]
    cdef bint deg

    with nogil:
        for i in range(bh):
            u = 2 * i
            for j in range(bw):
                v = 2 * j
                x0 = x[u, v]
                x1 = x[u, v + 1]
                x2 = x[u + 1, v]
                x3 = x[u + 1, v + 1]
                _acf(x0, x1, x2, x3, full_r1, r)
                deg = _levinson(r, epsilon, a)
                acf[i, j, 0] = r[0]
                acf[i, j, 1] = r[1]
                acf[i, j, 2] = r[2]
                acf[i, j, 3] = r[3]
                coeffs[i, j, 0] = a[1]
                coeffs[i, j, 1] = a[2]
                coeffs[i, j, 2] = a[3]
                b0[i, j] = r[0] + a[1] * r[1] + a[2] * r[2] + a[3] * r[3]
                energy[i, j] = _energy(r, a)
                degenerate[i, j] = deg
                secondary[i, j] = x2 * x1

    return (acf_arr, coeffs_arr, b0_arr, energy_arr,
            degenerate_arr.astype(bool), secondary_arr)


def solve_batch(acf_in, double epsilon):
    cdef const double[:, ::1] acf = np.ascontiguousarray(acf_in, dtype=np.float64)
    cdef Py_ssize_t n = acf.shape[0]
    coeffs_arr = np.empty((n, 3), dtype=np.float64)
    b0_arr = np.empty(n, dtype=np.float64)
    degenerate_arr = np.empty(n, dtype=np.uint8)
    cdef double[:, ::1] coeffs = coeffs_arr
    cdef double[::1] b0 = b0_arr
    cdef unsigned char[::1] degenerate = degenerate_arr
    cdef Py_ssize_t k
    cdef double r[4]
    cdef double a[4]
    with nogil:
        for k in range(n):
            r[0] = acf[k, 0]
            r[1] = acf[k, 1]
            r[2] = acf[k, 2]
            r[3] = acf[k, 3]
            degenerate[k] = _levinson(r, epsilon, a)
            coeffs[k, 0] = a[1]
            coeffs[k, 1] = a[2]
            coeffs[k, 2] = a[3]
            b0[k] = r[0] + a[1] * r[1] + a[2] * r[2] + a[3] * r[3]
    return coeffs_arr, b0_arr, degenerate_arr.astype(bool)


def energy_batch(acf_in, coeffs_in):
    cdef const double[:, ::1] acf = np.ascontiguousarray(acf_in, dtype=np.float64)
    cdef const double[:, ::1] coeffs = np.ascontiguousarray(coeffs_in, dtype=np.float64)
    cdef Py_ssize_t n = acf.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k
    cdef double r[4]
    cdef double a[4]
    with nogil:
        for k in range(n):
            r[0] = acf[k, 0]
            r[1] = acf[k, 1]
            r[2] = acf[k, 2]
            r[3] = acf[k, 3]
            a[0] = 1.0
            a[1] = coeffs[k, 0]
            a[2] = coeffs[k, 1]
            a[3] = coeffs[k, 2]
            out[k] = _energy(r, a)
    return out_arr
