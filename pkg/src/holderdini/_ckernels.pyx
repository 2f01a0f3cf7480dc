# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops; same contracts as ``_kernels_py``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt, isfinite

cnp.import_array()


def max_shift_ratio_1d(const double[:, ::1] h, const long long[::1] shifts, const double[::1] weights):
    cdef Py_ssize_t n = h.shape[0], ncomp = h.shape[1]
    cdef Py_ssize_t a, i, c, s
    cdef double best = 0.0, d, acc, diff
    for a in range(shifts.shape[0]):
        s = shifts[a]
        if s <= 0 or s >= n:
            continue
        d = 0.0
        for i in range(n - s):
            acc = 0.0
            for c in range(ncomp):
                diff = h[i + s, c] - h[i, c]
                acc += diff * diff
            if acc > d:
                d = acc
        d = sqrt(d) * weights[a]
        if d > best:
            best = d
    return best


def max_pair_ratio(const double[:, ::1] flat, const long long[::1] ia, const long long[::1] ib,
                   const double[::1] weights):
    cdef Py_ssize_t k, c, ncomp = flat.shape[1]
    cdef double best = 0.0, acc, diff, v
    for k in range(ia.shape[0]):
        acc = 0.0
        for c in range(ncomp):
            diff = flat[ib[k], c] - flat[ia[k], c]
            acc += diff * diff
        v = sqrt(acc) * weights[k]
        if v > best:
            best = v
    return best


cdef struct Knots:
    double ht
    double lo
    double dx
    Py_ssize_t nt
    Py_ssize_t nx


cdef inline void _time_cell(double t, Knots* g, Py_ssize_t* j, double* u) noexcept nogil:
    cdef double s = t / g.ht
    if s < 0.0:
        s = 0.0
    if s > g.nt - 1:
        s = g.nt - 1
    j[0] = <Py_ssize_t> floor(s)
    if j[0] > g.nt - 2:
        j[0] = g.nt - 2
    u[0] = s - j[0]


cdef inline void _space_cell(double x, Knots* g, Py_ssize_t* i, double* w) noexcept nogil:
    cdef double hi = g.lo + g.dx * (g.nx - 1)
    cdef double xc = x
    if xc < g.lo:
        xc = g.lo
    if xc > hi:
        xc = hi
    cdef double s = (xc - g.lo) / g.dx
    i[0] = <Py_ssize_t> floor(s)
    if i[0] < 0:
        i[0] = 0
    if i[0] > g.nx - 2:
        i[0] = g.nx - 2
    w[0] = s - i[0]


cdef inline double _value_slope(double x, double t, Knots* g, const double* vals, const double* dvals,
                               double* slope) noexcept nogil:
    cdef Py_ssize_t j, i
    cdef double u, w
    _time_cell(t, g, &j, &u)
    cdef double u2 = u * u, u3 = u * u * u
    cdef double c0 = 2 * u3 - 3 * u2 + 1
    cdef double c1 = (u3 - 2 * u2 + u) * g.ht
    cdef double c2 = -2 * u3 + 3 * u2
    cdef double c3 = (u3 - u2) * g.ht
    _space_cell(x, g, &i, &w)
    cdef Py_ssize_t r0 = j * g.nx + i, r1 = r0 + g.nx
    cdef double a = c0 * vals[r0] + c1 * dvals[r0] + c2 * vals[r1] + c3 * dvals[r1]
    cdef double b = c0 * vals[r0 + 1] + c1 * dvals[r0 + 1] + c2 * vals[r1 + 1] + c3 * dvals[r1 + 1]
    slope[0] = (b - a) / g.dx
    return (1 - w) * a + w * b


cdef inline double _value(double x, double t, Knots* g, const double* vals, const double* dvals) noexcept nogil:
    cdef double slope
    return _value_slope(x, t, g, vals, dvals, &slope)


cdef inline double _grad(double x, double t, Knots* g, const double* gvals) noexcept nogil:
    cdef Py_ssize_t j, i
    cdef double u, w
    if x < g.lo or x > g.lo + g.dx * (g.nx - 1):
        return 0.0
    _time_cell(t, g, &j, &u)
    _space_cell(x, g, &i, &w)
    cdef Py_ssize_t r0 = j * g.nx + i, r1 = r0 + g.nx
    cdef double a = (1 - u) * gvals[r0] + u * gvals[r1]
    cdef double b = (1 - u) * gvals[r0 + 1] + u * gvals[r1 + 1]
    return (1 - w) * a + w * b


cdef inline double _integrate(double x, double t0, double t1, Knots* g, const double* vals,
                              const double* dvals) noexcept nogil:
    cdef double total = 0.0, a = t0, b
    while a < t1:
        b = (floor(a / g.ht + 1e-9) + 1.0) * g.ht
        if b > t1:
            b = t1
        if b - a <= 1e-15:
            b = b + g.ht
            if b > t1:
                b = t1
        total += (b - a) / 6.0 * (_value(x, a, g, vals, dvals) + 4.0 * _value(x, 0.5 * (a + b), g, vals, dvals)
                                  + _value(x, b, g, vals, dvals))
        a = b
    return total


cdef inline int _invert(double y, double guess, double t, Knots* g, const double* vals, const double* dvals,
                        double tol, int max_iter, double* out) noexcept nogil:
    # Newton steps with the cell slope of the piecewise-linear interpolant
    cdef double hi = g.lo + g.dx * (g.nx - 1)
    cdef double x = guess, resid, slope
    cdef int it
    for it in range(max_iter):
        if x < g.lo or x > hi:
            return 1
        resid = x + _value_slope(x, t, g, vals, dvals, &slope) - y
        if fabs(resid) <= tol:
            out[0] = x
            return 0
        x = x - resid / (1.0 + slope)
    return 2


def transformed_euler_1d(const double[::1] y0, const double[:, ::1] dw, const double[::1] times, double lam,
                         double ht, double lo, double dx, const double[:, ::1] vals, const double[:, ::1] dvals,
                         const double[:, ::1] gvals, double tol, int max_iter):
    cdef Py_ssize_t npaths = y0.shape[0], nsteps = dw.shape[1]
    Y_arr = np.empty((npaths, nsteps + 1))
    X_arr = np.empty((npaths, nsteps + 1))
    cdef double[:, ::1] Y = Y_arr
    cdef double[:, ::1] X = X_arr
    cdef Knots g
    g.ht, g.lo, g.dx, g.nt, g.nx = ht, lo, dx, vals.shape[0], vals.shape[1]
    cdef Py_ssize_t p, k
    cdef double y, x, sig, ynew
    cdef const double* pv = &vals[0, 0]
    cdef const double* pd = &dvals[0, 0]
    cdef const double* pg = &gvals[0, 0]
    cdef int status = 0
    cdef Py_ssize_t bad = -1
    with nogil:
        for p in range(npaths):
            y = y0[p]
            Y[p, 0] = y
            status = _invert(y, y, times[0], &g, pv, pd, tol, max_iter, &x)
            if status:
                bad = 0
                break
            X[p, 0] = x
            for k in range(nsteps):
                sig = 1.0 + _grad(x, times[k], &g, pg)
                ynew = y + lam * _integrate(x, times[k], times[k + 1], &g, pv, pd) + sig * dw[p, k]
                if not isfinite(ynew):
                    status = 3
                    bad = k + 1
                    break
                status = _invert(ynew, x, times[k + 1], &g, pv, pd, tol, max_iter, &x)
                y = ynew
                if status:
                    bad = k + 1
                    break
                Y[p, k + 1] = y
                X[p, k + 1] = x
            if status:
                break
    return Y_arr, X_arr, status, bad
