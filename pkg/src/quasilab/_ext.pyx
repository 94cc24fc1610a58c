# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels. Mirrors quasilab._fallback one for one."""
import numpy as np
from libc.math cimport fabs, log, pow, sqrt, INFINITY

cdef inline double _omega(double t) nogil:
    if t == 0.0:
        return 0.0
    return t * log(fabs(t))


cdef inline double _row_pnorm(const double[:, ::1] X, Py_ssize_t i, double p) nogil:
    # scaled by the row maximum so |x|^p neither underflows nor overflows
    cdef Py_ssize_t k, n = X.shape[1]
    cdef double acc = 0.0, a, big = 0.0
    if p == 1.0:
        for k in range(n):
            acc += fabs(X[i, k])
        return acc
    for k in range(n):
        a = fabs(X[i, k])
        if a > big:
            big = a
    if big == 0.0 or big != big:
        return big
    if p == 2.0:
        for k in range(n):
            a = X[i, k] / big
            acc += a * a
        return big * sqrt(acc)
    for k in range(n):
        a = fabs(X[i, k]) / big
        if a > 0.0:
            acc += pow(a, p)
    return big * pow(acc, 1.0 / p)


def pnorm_rows(const double[:, ::1] X, double p):
    cdef Py_ssize_t i, m = X.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _row_pnorm(X, i, p)
    return out


def ribe_rows(const double[:, ::1] X):
    cdef Py_ssize_t i, k, m = X.shape[0], n = X.shape[1]
    cdef double s, acc
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            s = 0.0
            acc = 0.0
            for k in range(n):
                s += X[i, k]
                acc += _omega(X[i, k])
            o[i] = _omega(s) - acc
    return out


def kp_rows(const double[:, ::1] X, double p, double cap, bint nonhom):
    cdef Py_ssize_t i, k, m = X.shape[0], n = X.shape[1]
    cdef double nrm, a, t
    out = np.empty((m, n))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            nrm = 1.0 if nonhom else _row_pnorm(X, i, p)
            for k in range(n):
                a = fabs(X[i, k])
                if a == 0.0:
                    o[i, k] = 0.0
                    continue
                if nonhom:
                    t = -log(a)
                else:
                    t = nrm / a
                    # subnormal a can overflow the ratio
                    t = log(t) if t < INFINITY else log(nrm) - log(a)
                if t < 0.0:
                    t = 0.0
                elif t > cap:
                    t = cap
                o[i, k] = X[i, k] * t
    return out


def lemma_w_grid(double lo, double step, Py_ssize_t count):
    cdef Py_ssize_t i, j
    cdef double s, t, r, den
    cdef double best = 0.0, bs = 0.0, bt = 0.0
    cdef double ceiling = log(2.0) + 1e-12
    cdef long over = 0
    g_arr = lo + step * np.arange(count, dtype=float)
    w_arr = np.array([_omega(v) for v in g_arr], dtype=float)
    cdef double[::1] g = g_arr
    cdef double[::1] w = w_arr
    with nogil:
        for i in range(count):
            s = g[i]
            for j in range(count):
                t = g[j]
                den = fabs(s) + fabs(t)
                if den == 0.0:
                    continue
                r = fabs(_omega(s + t) - w[i] - w[j]) / den
                if r > ceiling:
                    over += 1
                if r > best:
                    best = r
                    bs = s
                    bt = t
    return best, bs, bt, over
