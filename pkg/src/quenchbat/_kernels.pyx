# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; mirrors ``_kernels_py`` function for function."""
import numpy as np

from libc.math cimport sin, tanh, sqrt, fabs, isinf
from libc.stdlib cimport malloc, free

cdef double SMALL_PHASE = 1e-4
cdef double F0_SINGULAR_TOL = 1e-12


cdef inline double _factor(double omega, double tau) noexcept nogil:
    cdef double x, s
    if isinf(tau):
        if omega == 0.0:
            return 0.0
        return 1.0 / (omega * omega)
    x = omega * tau
    if fabs(x) < SMALL_PHASE:
        return 2.0 * tau * tau * (1.0 - x * x / 3.0)
    s = sin(x)
    return 2.0 * s * s / (omega * omega)


cdef inline Py_ssize_t _pow2(Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t m = 1
    while m < n:
        m <<= 1
    return m


cdef double _tree_sum(double* buf, Py_ssize_t n) noexcept nogil:
    # buf must hold _pow2(n) doubles
    cdef Py_ssize_t m = _pow2(n)
    cdef Py_ssize_t i
    for i in range(n, m):
        buf[i] = 0.0
    while m > 1:
        m >>= 1
        for i in range(m):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
    return buf[0]


def pairwise_sum(x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t i
    cdef double* buf = <double*> malloc(_pow2(n) * sizeof(double))
    cdef double total
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            buf[i] = xv[i]
        total = _tree_sum(buf, n)
    finally:
        free(buf)
    return total


def oscillation_factor(omega, tau):
    om, tt = np.broadcast_arrays(np.asarray(omega, dtype=np.float64), np.asarray(tau, dtype=np.float64))
    shape = om.shape
    cdef const double[::1] o = np.ascontiguousarray(om).ravel()
    cdef const double[::1] t = np.ascontiguousarray(tt).ravel()
    out = np.empty(o.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(o.shape[0]):
            ov[i] = _factor(o[i], t[i])
    return out.reshape(shape)


def oscillation_sum(g, omega, taus):
    cdef const double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef const double[::1] ov = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(taus, dtype=np.float64)
    cdef Py_ssize_t n = gv.shape[0]
    cdef Py_ssize_t nt = tv.shape[0]
    cdef Py_ssize_t i, j
    out = np.empty(nt)
    cdef double[::1] res = out
    cdef double* buf = <double*> malloc(_pow2(n) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(nt):
                for i in range(n):
                    buf[i] = gv[i] * _factor(ov[i], tv[j])
                res[j] = _tree_sum(buf, n)
    finally:
        free(buf)
    return out


def sc_amplitude(xa, za, xb, zb, double beta):
    arrs = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (xa, za, xb, zb)))
    shape = arrs[0].shape
    cdef const double[::1] a1 = np.ascontiguousarray(arrs[0]).ravel()
    cdef const double[::1] a2 = np.ascontiguousarray(arrs[1]).ravel()
    cdef const double[::1] b1 = np.ascontiguousarray(arrs[2]).ravel()
    cdef const double[::1] b2 = np.ascontiguousarray(arrs[3]).ravel()
    out = np.empty(a1.shape[0])
    cdef double[::1] ov = out
    cdef bint zero_t = isinf(beta)
    cdef double eps, c, t
    cdef Py_ssize_t i
    with nogil:
        for i in range(a1.shape[0]):
            eps = sqrt(a1[i] * a1[i] + a2[i] * a2[i])
            if eps > 0.0:
                c = a1[i] * b2[i] - a2[i] * b1[i]
                t = 1.0 if zero_t else tanh(0.5 * beta * eps)
                ov[i] = c * c * t / (2.0 * eps)
            else:
                ov[i] = 0.0
    return out.reshape(shape)


cdef inline double _f0(double a1, double a2, double a3, double b1, double b2, double b3) noexcept nogil:
    cdef double s2 = b1 * b1 + b2 * b2
    cdef double cross3 = a1 * b2 - a2 * b1
    cdef double s, inplane, t, cx, cy
    if s2 >= F0_SINGULAR_TOL:
        s = sqrt(s2)
        inplane = a1 * b1 + a2 * b2
        t = a3 * s - b3 * inplane / s
        return (s2 + b3 * b3) / s2 * cross3 * cross3 + t * t
    cx = a2 * b3 - a3 * b2
    cy = a3 * b1 - a1 * b3
    return cx * cx + cy * cy + cross3 * cross3


def nonsc_amplitude(a1, a2, a3, b1, b2, b3, ft):
    arrs = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a1, a2, a3, b1, b2, b3, ft)))
    shape = arrs[0].shape
    cdef const double[::1] x1 = np.ascontiguousarray(arrs[0]).ravel()
    cdef const double[::1] x2 = np.ascontiguousarray(arrs[1]).ravel()
    cdef const double[::1] x3 = np.ascontiguousarray(arrs[2]).ravel()
    cdef const double[::1] y1 = np.ascontiguousarray(arrs[3]).ravel()
    cdef const double[::1] y2 = np.ascontiguousarray(arrs[4]).ravel()
    cdef const double[::1] y3 = np.ascontiguousarray(arrs[5]).ravel()
    cdef const double[::1] w = np.ascontiguousarray(arrs[6]).ravel()
    out = np.empty(x1.shape[0])
    cdef double[::1] ov = out
    cdef double eps
    cdef Py_ssize_t i
    with nogil:
        for i in range(x1.shape[0]):
            eps = sqrt(x1[i] * x1[i] + x2[i] * x2[i] + x3[i] * x3[i])
            if eps > 0.0:
                ov[i] = _f0(x1[i], x2[i], x3[i], y1[i], y2[i], y3[i]) * w[i] / eps
            else:
                ov[i] = 0.0
    return out.reshape(shape)
