"""NumPy fallback for the compiled kernels; same signatures and results."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _eval(x, f, u):
    return np.interp(u, x, f)


def _min_on(x, f, a, b):
    m = np.minimum(_eval(x, f, a), _eval(x, f, b))
    for xk, fk in zip(x[1:-1], f[1:-1]):
        inside = (xk > a) & (xk < b)
        if np.any(inside):
            m = np.where(inside, np.minimum(m, fk), m)
    return m


def _max_on(x, f, a, b):
    m = np.maximum(_eval(x, f, a), _eval(x, f, b))
    for xk, fk in zip(x[1:-1], f[1:-1]):
        inside = (xk > a) & (xk < b)
        if np.any(inside):
            m = np.where(inside, np.maximum(m, fk), m)
    return m


def _tv(x, f, a, b):
    total = np.zeros(np.broadcast(a, b).shape)
    slopes = np.abs(np.diff(f) / np.diff(x))
    for k in range(len(x) - 1):
        lap = np.minimum(b, x[k + 1]) - np.maximum(a, x[k])
        total = total + np.where(lap > 0, lap, 0.0) * slopes[k]
    return total


def num_flux_array(kind, x, f, a, b, alpha):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if kind == 0:
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return np.where(a <= b, _min_on(x, f, lo, hi), _max_on(x, f, lo, hi))
    if kind == 1:
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        tv = _tv(x, f, lo, hi)
        return 0.5 * (_eval(x, f, a) + _eval(x, f, b) - np.where(a <= b, tv, -tv))
    return 0.5 * (_eval(x, f, a) + _eval(x, f, b)) - 0.5 * alpha * (b - a)


def _faces(u, xl, fl, xr, fr, n_left, iface, kind, alpha_l, alpha_r):
    n = len(u)
    g = np.empty(n + 1)
    g[0] = _eval(xl, fl, u[0])
    g[n] = _eval(xr, fr, u[-1]) if n_left < n else _eval(xl, fl, u[-1])
    if n_left > 1:
        g[1:n_left] = num_flux_array(kind, xl, fl, u[:n_left - 1], u[1:n_left], alpha_l)
    if n_left < n - 1:
        g[n_left + 1:n] = num_flux_array(kind, xr, fr, u[n_left:n - 1], u[n_left + 1:], alpha_r)
    if 0 < n_left < n:
        g[n_left] = iface
    return g


def fv_step(u, out, xl, fl, xr, fr, n_left, lam, iface, kind, alpha_l, alpha_r):
    u = np.asarray(u)
    g = _faces(u, xl, fl, xr, fr, n_left, iface, kind, alpha_l, alpha_r)
    out[:] = u - lam * (g[1:] - g[:-1])
    return float(g[0]), float(g[-1])


def parabolic_step(u, out, xl, fl, xr, fr, axl, afl, axr, afr, n_left, lam, mu, iface,
                   kind, alpha_l, alpha_r):
    u = np.asarray(u)
    n = len(u)
    g = _faces(u, xl, fl, xr, fr, n_left, iface, kind, alpha_l, alpha_r)
    a = np.empty(n)
    a[:n_left] = _eval(axl, afl, u[:n_left])
    a[n_left:] = _eval(axr, afr, u[n_left:])
    d = np.zeros(n + 1)
    d[1:n] = a[1:] - a[:-1]
    out[:] = u - lam * (g[1:] - g[:-1]) + mu * (d[1:] - d[:-1])
    return float(g[0]), float(g[-1])


def rk4_profile(x, f, s, w0, h, nsteps, lo, hi, target, stop_tol):
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    xs, fs = x.tolist(), f.tolist()
    from bisect import bisect_right

    def ev(u):
        if u <= xs[0]:
            return fs[0]
        if u >= xs[-1]:
            return fs[-1]
        k = bisect_right(xs, u) - 1
        return fs[k] + (fs[k + 1] - fs[k]) * (u - xs[k]) / (xs[k + 1] - xs[k])

    def clamp(v):
        return lo if v < lo else (hi if v > hi else v)

    out = [w0]
    cur = w0
    exited = False
    taken = 0
    for i in range(nsteps):
        k1 = ev(cur) - s
        k2 = ev(clamp(cur + 0.5 * h * k1)) - s
        k3 = ev(clamp(cur + 0.5 * h * k2)) - s
        k4 = ev(clamp(cur + h * k3)) - s
        nxt = cur + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if nxt < lo - stop_tol or nxt > hi + stop_tol:
            exited = True
        cur = clamp(nxt)
        taken = i + 1
        out.append(cur)
        if exited or abs(cur - target) <= stop_tol:
            break
    return np.asarray(out), taken, exited
