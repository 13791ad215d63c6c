# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled spectral kernels. Same contracts as ``_pykernels``."""

import numpy as np
from libc.math cimport pow


cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _transition(const double complex[:, :] W, const double complex[:, :] U,
                      double[:, :] out) noexcept nogil:
    cdef Py_ssize_t n = W.shape[0], nk = W.shape[1], na = U.shape[1]
    cdef Py_ssize_t i, k, a
    cdef double complex acc
    for k in range(nk):
        for a in range(na):
            acc = 0
            for i in range(n):
                acc = acc + W[i, k].conjugate() * U[i, a]
            out[k, a] = _abs2(acc)


def transition_matrix(const double complex[:, :] W, const double complex[:, :] U):
    out = np.empty((W.shape[1], U.shape[1]))
    cdef double[:, :] o = out
    with nogil:
        _transition(W, U, o)
    return out


def spectral_overlap_trace(const double[:] r, const double complex[:, :] U,
                           const double[:] s, const double complex[:, :] V,
                           double p):
    cdef Py_ssize_t n = U.shape[1], m = V.shape[1], a, b
    cdef double total = 0.0, ra
    cdef double[:, :] o = np.empty((n, m))
    cdef double[:] sq = np.empty(m)
    with nogil:
        _transition(U, V, o)
        for b in range(m):
            sq[b] = pow(s[b], 1.0 - p) if s[b] > 0 else 0.0
        for a in range(n):
            if r[a] <= 0:
                continue
            ra = pow(r[a], p)
            for b in range(m):
                total += ra * o[a, b] * sq[b]
    return total


def pinched_trace(const double[:] r, const double complex[:, :] U,
                  const double[:] s, const double complex[:, :] V,
                  const double complex[:, :] W, double p):
    cdef Py_ssize_t nk = W.shape[1], na = U.shape[1], nb = V.shape[1], k, a, b
    cdef double total = 0.0, x, y
    cdef double[:, :] mu = np.empty((nk, na))
    cdef double[:, :] nu = np.empty((nk, nb))
    with nogil:
        _transition(W, U, mu)
        _transition(W, V, nu)
        for k in range(nk):
            x = 0.0
            y = 0.0
            for a in range(na):
                x += r[a] * mu[k, a]
            for b in range(nb):
                y += s[b] * nu[k, b]
            if x > 0 and y > 0:
                total += pow(x, p) * pow(y, 1.0 - p)
    return total


def concavity_bound(const double[:] r, const double complex[:, :] U,
                    const double[:] s, const double complex[:, :] V,
                    const double complex[:, :] W, double p):
    cdef Py_ssize_t nk = W.shape[1], na = U.shape[1], nb = V.shape[1], k, a, b
    cdef double total = 0.0, x, y
    cdef double[:, :] mu = np.empty((nk, na))
    cdef double[:, :] nu = np.empty((nk, nb))
    with nogil:
        _transition(W, U, mu)
        _transition(W, V, nu)
        for k in range(nk):
            x = 0.0
            y = 0.0
            for a in range(na):
                if r[a] > 0:
                    x += mu[k, a] * pow(r[a], p)
            for b in range(nb):
                if s[b] > 0:
                    y += nu[k, b] * pow(s[b], 1.0 - p)
            total += x * y
    return total
