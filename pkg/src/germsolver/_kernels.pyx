# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops: finite-volume and parabolic steps, RK4 profiles."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmin, fmax

cnp.import_array()

BACKEND = "cython"


cdef inline Py_ssize_t _seg(const double[::1] x, double u) noexcept nogil:
    # index k with x[k] <= u < x[k+1], clamped to [0, n-2]
    cdef Py_ssize_t lo = 0, hi = x.shape[0] - 1, mid
    if u <= x[0]:
        return 0
    if u >= x[hi]:
        return hi - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if x[mid] <= u:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline double _eval(const double[::1] x, const double[::1] f, double u) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], k
    if u <= x[0]:
        return f[0]
    if u >= x[n - 1]:
        return f[n - 1]
    k = _seg(x, u)
    if u == x[k]:
        return f[k]
    return f[k] + (f[k + 1] - f[k]) * (u - x[k]) / (x[k + 1] - x[k])


cdef inline double _min_on(const double[::1] x, const double[::1] f, double a, double b) noexcept nogil:
    cdef double m = fmin(_eval(x, f, a), _eval(x, f, b))
    cdef Py_ssize_t k = _seg(x, a) + 1, n = x.shape[0]
    while k < n and x[k] < b:
        if x[k] > a:
            m = fmin(m, f[k])
        k += 1
    return m


cdef inline double _max_on(const double[::1] x, const double[::1] f, double a, double b) noexcept nogil:
    cdef double m = fmax(_eval(x, f, a), _eval(x, f, b))
    cdef Py_ssize_t k = _seg(x, a) + 1, n = x.shape[0]
    while k < n and x[k] < b:
        if x[k] > a:
            m = fmax(m, f[k])
        k += 1
    return m


cdef inline double _tv(const double[::1] x, const double[::1] f, double a, double b) noexcept nogil:
    # total variation of f on [a, b], a <= b
    cdef double total = 0.0, prev = _eval(x, f, a), cur
    cdef Py_ssize_t k = _seg(x, a) + 1, n = x.shape[0]
    while k < n and x[k] < b:
        if x[k] > a:
            cur = f[k]
            total += fabs(cur - prev)
            prev = cur
        k += 1
    total += fabs(_eval(x, f, b) - prev)
    return total


cdef inline double _num_flux(int kind, const double[::1] x, const double[::1] f,
                             double a, double b, double alpha) noexcept nogil:
    if kind == 0:
        if a <= b:
            return _min_on(x, f, a, b)
        return _max_on(x, f, b, a)
    if kind == 1:
        if a <= b:
            return 0.5 * (_eval(x, f, a) + _eval(x, f, b) - _tv(x, f, a, b))
        return 0.5 * (_eval(x, f, a) + _eval(x, f, b) + _tv(x, f, b, a))
    return 0.5 * (_eval(x, f, a) + _eval(x, f, b)) - 0.5 * alpha * (b - a)


def num_flux_array(int kind, const double[::1] x, const double[::1] f,
                   const double[::1] a, const double[::1] b, double alpha):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _num_flux(kind, x, f, a[i], b[i], alpha)
    return out


def fv_step(const double[::1] u, double[::1] out,
            const double[::1] xl, const double[::1] fl,
            const double[::1] xr, const double[::1] fr,
            Py_ssize_t n_left, double lam, double iface, int kind,
            double alpha_l, double alpha_r):
    """One conservative step; returns the two outer boundary fluxes."""
    cdef Py_ssize_t n = u.shape[0], j
    cdef double g_prev, g_next, g_first, g_last
    with nogil:
        g_first = _eval(xl, fl, u[0])
        g_prev = g_first
        for j in range(n):
            if j == n - 1:
                g_next = _eval(xr, fr, u[n - 1]) if n_left < n else _eval(xl, fl, u[n - 1])
            elif j == n_left - 1:
                g_next = iface
            elif j < n_left - 1:
                g_next = _num_flux(kind, xl, fl, u[j], u[j + 1], alpha_l)
            else:
                g_next = _num_flux(kind, xr, fr, u[j], u[j + 1], alpha_r)
            out[j] = u[j] - lam * (g_next - g_prev)
            g_prev = g_next
        g_last = g_prev
    return g_first, g_last


def parabolic_step(const double[::1] u, double[::1] out,
                   const double[::1] xl, const double[::1] fl,
                   const double[::1] xr, const double[::1] fr,
                   const double[::1] axl, const double[::1] afl,
                   const double[::1] axr, const double[::1] afr,
                   Py_ssize_t n_left, double lam, double mu, double iface, int kind,
                   double alpha_l, double alpha_r):
    """Convective step plus mu * (a(u_{j+1}) - 2 a(u_j) + a(u_{j-1})) with side-wise a."""
    cdef Py_ssize_t n = u.shape[0], j
    cdef double g_prev, g_next, d_prev, d_next, a_j, a_n, g_first, g_last
    with nogil:
        g_first = _eval(xl, fl, u[0])
        g_prev = g_first
        d_prev = 0.0
        a_j = _eval(axl, afl, u[0]) if 0 < n_left else _eval(axr, afr, u[0])
        for j in range(n):
            if j == n - 1:
                g_next = _eval(xr, fr, u[n - 1]) if n_left < n else _eval(xl, fl, u[n - 1])
                d_next = 0.0
                a_n = a_j
            else:
                if j == n_left - 1:
                    g_next = iface
                elif j < n_left - 1:
                    g_next = _num_flux(kind, xl, fl, u[j], u[j + 1], alpha_l)
                else:
                    g_next = _num_flux(kind, xr, fr, u[j], u[j + 1], alpha_r)
                if j + 1 < n_left:
                    a_n = _eval(axl, afl, u[j + 1])
                else:
                    a_n = _eval(axr, afr, u[j + 1])
                d_next = a_n - a_j
            out[j] = u[j] - lam * (g_next - g_prev) + mu * (d_next - d_prev)
            g_prev = g_next
            d_prev = d_next
            a_j = a_n
        g_last = g_prev
    return g_first, g_last


def rk4_profile(const double[::1] x, const double[::1] f, double s, double w0,
                double h, Py_ssize_t nsteps, double lo, double hi,
                double target, double stop_tol):
    """Integrate W' = f(W) - s with step h, clamping W to [lo, hi].

    Stops early once |W - target| <= stop_tol or W leaves [lo, hi] by more
    than stop_tol before clamping.  Returns (values, steps_taken, exited).
    """
    out = np.empty(nsteps + 1)
    cdef double[::1] w = out
    cdef double k1, k2, k3, k4, cur = w0, nxt
    cdef Py_ssize_t i, taken = 0
    cdef int exited = 0
    w[0] = cur
    with nogil:
        for i in range(nsteps):
            k1 = _eval(x, f, cur) - s
            k2 = _eval(x, f, fmin(fmax(cur + 0.5 * h * k1, lo), hi)) - s
            k3 = _eval(x, f, fmin(fmax(cur + 0.5 * h * k2, lo), hi)) - s
            k4 = _eval(x, f, fmin(fmax(cur + h * k3, lo), hi)) - s
            nxt = cur + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if nxt < lo - stop_tol or nxt > hi + stop_tol:
                exited = 1
            cur = fmin(fmax(nxt, lo), hi)
            taken = i + 1
            w[taken] = cur
            if exited or fabs(cur - target) <= stop_tol:
                break
    return out[:taken + 1], taken, bool(exited)
