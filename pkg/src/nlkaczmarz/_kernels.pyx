# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-iteration hot kernels (greedy selection and block direction).

Semantics match ``_kernels_py`` exactly; see that module for docstrings.
"""
import numpy as np

COMPILED = True


def ngabk_select(double[::1] fx):
    cdef Py_ssize_t m = fx.shape[0]
    cdef Py_ssize_t i, count = 0
    # scale by max|f_i| first: squaring raw components under/overflows for
    # |f_i| beyond ~1e±154 and would empty the selection
    cdef double scale = 0.0, r2 = 0.0, amax = 0.0, a, w, delta, thresh
    for i in range(m):
        a = fx[i] if fx[i] >= 0.0 else -fx[i]
        if a > scale:
            scale = a
    for i in range(m):
        w = fx[i] / scale
        a = w * w
        r2 += a
        if a > amax:
            amax = a
    delta = 0.5 * (amax / r2 + 1.0 / m)
    thresh = delta * r2
    out = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = out
    for i in range(m):
        w = fx[i] / scale
        if w * w >= thresh:
            idx[count] = i
            count += 1
    return out[:count], delta


def mrnabk_select(double[::1] fx, double rho):
    cdef Py_ssize_t m = fx.shape[0]
    cdef Py_ssize_t i, count = 0
    cdef double scale = 0.0, a, w
    for i in range(m):
        a = fx[i] if fx[i] >= 0.0 else -fx[i]
        if a > scale:
            scale = a
    # after scaling the max squared component is exactly 1, so the cut is rho
    out = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = out
    for i in range(m):
        w = fx[i] / scale
        if w * w >= rho:
            idx[count] = i
            count += 1
    return out[:count], rho * (scale * scale)


def block_direction(double[::1] f_tau, double[:, ::1] g_tau):
    cdef Py_ssize_t t = f_tau.shape[0]
    cdef Py_ssize_t n = g_tau.shape[1]
    cdef Py_ssize_t i, j
    cdef double s2 = 0.0, w
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] d = out
    for i in range(t):
        w = f_tau[i]
        s2 += w * w
        for j in range(n):
            d[j] -= w * g_tau[i, j]
    return out, s2
