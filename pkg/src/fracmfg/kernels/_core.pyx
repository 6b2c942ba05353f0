# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Godunov Hamiltonian evaluation and L1 memory sums.

Signatures mirror ``fracmfg.kernels._reference``; the backend is chosen at
import time in ``fracmfg.kernels``.
"""

from libc.math cimport pow, sqrt


cdef inline double _halfpow(double s, double e) noexcept nogil:
    # s**e for e = beta/2 or beta/2 - 1; fast paths for the common exponents
    if e == 0.0:
        return 1.0
    if e == 1.0:
        return s
    if e == 0.5:
        return sqrt(s)
    if e == 1.5:
        return s * sqrt(s)
    if e == 2.0:
        return s * s
    return pow(s, e)


def godunov_value(double[:, ::1] q, double beta, double scale, double[::1] out):
    """out[i] = scale * (sum of squared upwind parts at point i)**(beta/2).

    Rows of ``q`` alternate (minus-part, plus-part): even rows enter through
    their negative part, odd rows through their positive part.
    """
    cdef Py_ssize_t npts = q.shape[1]
    cdef Py_ssize_t ncomp = q.shape[0]
    cdef Py_ssize_t i, k
    cdef double s, v
    cdef double e = 0.5 * beta
    for i in range(npts):
        s = 0.0
        for k in range(0, ncomp, 2):
            v = q[k, i]
            if v < 0.0:
                s += v * v
            v = q[k + 1, i]
            if v > 0.0:
                s += v * v
        out[i] = scale * _halfpow(s, e)


def godunov_grad(double[:, ::1] q, double beta, double scale, double[:, ::1] out):
    """Partial derivatives of ``godunov_value`` w.r.t. each q-component.

    At a kink (component exactly 0) the one-sided value 0 is used.
    """
    cdef Py_ssize_t npts = q.shape[1]
    cdef Py_ssize_t ncomp = q.shape[0]
    cdef Py_ssize_t i, k
    cdef double s, v, fac
    cdef double e = 0.5 * beta - 1.0
    for i in range(npts):
        s = 0.0
        for k in range(0, ncomp, 2):
            v = q[k, i]
            if v < 0.0:
                s += v * v
            v = q[k + 1, i]
            if v > 0.0:
                s += v * v
        if s == 0.0:
            fac = scale * beta if beta == 2.0 else 0.0
        else:
            fac = scale * beta * _halfpow(s, e)
        for k in range(0, ncomp, 2):
            v = q[k, i]
            out[k, i] = fac * v if v < 0.0 else 0.0
            v = q[k + 1, i]
            out[k + 1, i] = fac * v if v > 0.0 else 0.0


def weighted_history_sum(double[::1] w, double[:, ::1] hist, double[::1] out):
    """out[i] = sum_k w[k] * hist[k, i] (the L1 memory accumulation)."""
    cdef Py_ssize_t nterm = w.shape[0]
    cdef Py_ssize_t npts = hist.shape[1]
    cdef Py_ssize_t i, k
    cdef double wk
    for i in range(npts):
        out[i] = 0.0
    for k in range(nterm):
        wk = w[k]
        for i in range(npts):
            out[i] += wk * hist[k, i]
