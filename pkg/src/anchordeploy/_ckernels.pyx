# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ray kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, floor, fabs, NAN, INFINITY

cnp.import_array()

KIND_H, KIND_L, KIND_T = 0, 1, 2
STATUS_OK = 0
STATUS_TOO_LARGE = 1
STATUS_TOO_SMALL = 2
STATUS_MAXITER = 3


cdef inline int _totals(const double[::1] s, double depth, double c,
                        double* h, double* L, double* t) noexcept nogil:
    cdef Py_ssize_t n = <Py_ssize_t>floor(depth)
    cdef double frac = depth - n
    cdef double s0 = s[0]
    cdef double s02 = s0 * s0
    cdef double hh = 0.0, ll = 0.0, tt = 0.0
    cdef double si, q, dl
    cdef Py_ssize_t i
    for i in range(n):
        si = s[i]
        q = s02 - si * si * c * c
        if q <= 0.0:
            return 1
        dl = s0 / sqrt(q)
        ll += dl
        hh += dl * si * c / s0
        tt += dl / si
    if frac > 0.0:
        si = s[n]
        q = s02 - si * si * c * c
        if q <= 0.0:
            return 1
        dl = frac * s0 / sqrt(q)
        ll += dl
        hh += dl * si * c / s0
        tt += dl / si
    h[0] = hh
    L[0] = ll
    t[0] = tt
    return 0


cdef inline int _value_deriv(const double[::1] s, double depth, int kind, double theta,
                             double* f, double* df) noexcept nogil:
    """One total and its derivative with respect to theta0."""
    cdef Py_ssize_t n = <Py_ssize_t>floor(depth)
    cdef double frac = depth - n
    cdef double c = cos(theta), sn = sin(theta)
    cdef double s0 = s[0]
    cdef double s02 = s0 * s0
    cdef double v = 0.0, dv = 0.0
    cdef double si, q, rq, w
    cdef Py_ssize_t i, last = n + (1 if frac > 0.0 else 0)
    for i in range(last):
        si = s[i]
        w = 1.0 if i < n else frac
        q = s02 - si * si * c * c
        if q <= 0.0:
            return 1
        rq = 1.0 / sqrt(q)
        if kind == 0:
            v += w * si * c * rq
            dv -= w * si * sn * s02 * rq * rq * rq
        elif kind == 1:
            v += w * s0 * rq
            dv -= w * s0 * si * si * c * sn * rq * rq * rq
        else:
            v += w * s0 * rq / si
            dv -= w * s0 * si * c * sn * rq * rq * rq
    f[0] = v
    df[0] = dv
    return 0


def ray_totals(const double[::1] speeds, double depth, double cos0):
    cdef double h, L, t
    if _totals(speeds, depth, cos0, &h, &L, &t):
        return NAN, NAN, NAN
    return h, L, t


def ray_totals_many(const double[::1] speeds, double depth, cos0s):
    cdef const double[::1] c = np.ascontiguousarray(np.atleast_1d(cos0s), dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0], k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] H = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Ls = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] T = np.empty(m)
    cdef double h, L, t
    for k in range(m):
        if _totals(speeds, depth, c[k], &h, &L, &t):
            H[k] = NAN
            Ls[k] = NAN
            T[k] = NAN
        else:
            H[k] = h
            Ls[k] = L
            T[k] = t
    return H, Ls, T


def invert_many(const double[::1] speeds, double depth, targets, int kind,
                double lo, double hi, double ang_tol, double val_tol, int max_iter):
    cdef const double[::1] tg = np.ascontiguousarray(np.atleast_1d(targets), dtype=np.float64)
    cdef Py_ssize_t m = tg.shape[0], k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(m, np.nan)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] status = np.zeros(m, dtype=np.int64)
    cdef double f_lo, f_hi, a, b, x, f, df, dx, dxold, target, tmp
    cdef int it, done
    # a turning ray counts as +inf: the target is then always bracketed
    if _value_deriv(speeds, depth, kind, lo, &f_lo, &tmp):
        f_lo = INFINITY
    if _value_deriv(speeds, depth, kind, hi, &f_hi, &tmp):
        f_hi = INFINITY
    for k in range(m):
        target = tg[k]
        if target > f_lo + val_tol:
            status[k] = STATUS_TOO_LARGE
            continue
        if target < f_hi - val_tol:
            status[k] = STATUS_TOO_SMALL
            continue
        # totals decrease in theta: f(a) >= 0 >= f(b)
        a = lo
        b = hi
        x = 0.5 * (a + b)
        dxold = b - a
        dx = dxold
        if _value_deriv(speeds, depth, kind, x, &f, &df):
            f = INFINITY
            df = 0.0
        else:
            f -= target
        done = 0
        for it in range(max_iter):
            if fabs(f) < val_tol:
                done = 1
                break
            if f > 0.0:
                a = x
            else:
                b = x
            if b - a < ang_tol:
                x = 0.5 * (a + b)
                done = 1
                break
            # Newton step when it stays inside the bracket and shrinks fast enough
            if (df == 0.0 or ((x - b) * df - f) * ((x - a) * df - f) > 0.0
                    or fabs(2.0 * f) > fabs(dxold * df)):
                dxold = dx
                dx = 0.5 * (b - a)
                x = a + dx
            else:
                dxold = dx
                dx = f / df
                x -= dx
            if fabs(dx) < ang_tol:
                done = 1
                break
            if _value_deriv(speeds, depth, kind, x, &f, &df):
                f = INFINITY
                df = 0.0
            else:
                f -= target
        if done:
            out[k] = x
        else:
            status[k] = STATUS_MAXITER
    return out, status
