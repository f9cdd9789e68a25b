"""Viscous regularizations near the interface.

Standing-wave profiles solve the autonomous ODE W' = f(W) - s on each side
of x = 0; smoothed-flux profiles blend the two fluxes over a layer; the
adapted-viscosity construction and an explicit parabolic solver cover the
regularized PDE itself.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CFLRatioViolated, DegenerateSlope, RHViolation, StabilityViolation, ValidationError
from .flux import FluxPair, Interval, PiecewiseLinearFlux
from .germ import RH_TOL, StatePair, GermSpec, is_bell
from .scheme import GridSolution, MeshConfig, _as_initial, cfl_timestep, linfty_envelope, make_interface_flux

log = logging.getLogger(__name__)

PROFILE_TOL = 1e-6
ODE_STEPS = 100_000
# interior matching points tried besides W(0) = u^r and W(0) = u^l
_INTERIOR = (0.5, 0.25, 0.75, 0.125, 0.875)

__all__ = [
    "Profile",
    "ViscosityPair",
    "standing_wave",
    "smoothed_profile",
    "adapted_viscosity",
    "identity_viscosity",
    "run_parabolic",
]


@dataclass
class Profile:
    xi: np.ndarray
    w: np.ndarray
    verdict: str
    limits: tuple
    pair: StatePair
    matching: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def connects(self) -> bool:
        return self.verdict == "connects"

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "verdict": self.verdict,
            "limits": list(self.limits),
            "matching": self.matching,
            **self.detail,
        }


def _check_rh(fluxes: FluxPair, pair, rh_tol: float) -> tuple[float, float, float]:
    ul, ur = float(pair[0]), float(pair[1])
    sl, sr = fluxes.left(ul), fluxes.right(ur)
    if abs(sl - sr) > rh_tol:
        raise RHViolation(f"pair ({ul}, {ur}) violates Rankine-Hugoniot: {sl} vs {sr}")
    return ul, ur, 0.5 * (sl + sr)


def _leg(f: PiecewiseLinearFlux, s: float, w0: float, target: float, backward: bool,
         x_span: float, lo: float, hi: float, tol: float):
    """One half-line of a standing wave; returns (values, h, status)."""
    h = x_span / ODE_STEPS
    if abs(w0 - target) <= tol:
        return np.array([w0]), h, "reached"
    x = np.ascontiguousarray(f.u)
    y = np.ascontiguousarray(-f.f if backward else f.f)
    w, taken, exited = kernels.rk4_profile(x, y, -s if backward else s, w0, h, ODE_STEPS,
                                           lo, hi, target, tol)
    w = np.asarray(w)
    if abs(w[-1] - target) <= tol:
        return w, h, "reached"
    if exited:
        return w, h, "exited"
    # stalled at an equilibrium other than the target
    if abs(f(w[-1]) - s) <= 1e-9 or (len(w) > 1 and abs(w[-1] - w[-2]) < 1e-14):
        return w, h, "blocked"
    return w, h, "running"


def _thin(xi, w, cap=4001):
    if len(xi) <= cap:
        return xi, w
    idx = np.unique(np.linspace(0, len(xi) - 1, cap).round().astype(int))
    return xi[idx], w[idx]


def standing_wave(fluxes: FluxPair, pair, x_span: float = 100.0,
                  profile_tol: float = PROFILE_TOL, rh_tol: float = RH_TOL) -> Profile:
    """Shoot W with W(-inf) = u^l, W(+inf) = u^r from a matching value W(0).

    The matching value is tried at u^r, at u^l and at a few interior points
    of the pair interval; the left leg runs backward under f^l and the right
    leg forward under f^r, both clamped to the pair interval.
    """
    ul, ur, s = _check_rh(fluxes, pair, rh_tol)
    p = StatePair(ul, ur)
    if abs(ul - ur) <= profile_tol:
        return Profile(np.array([-x_span, 0.0, x_span]), np.array([ul, ul, ur]),
                       "connects", (ul, ur), p, ul)
    lo, hi = min(ul, ur), max(ul, ur)
    candidates = [ur, ul] + [ul + t * (ur - ul) for t in _INTERIOR]
    statuses = []
    best = None
    for w0 in candidates:
        left, h, st_l = _leg(fluxes.left, s, w0, ul, True, x_span, lo, hi, profile_tol)
        if st_l != "reached":
            statuses.append(st_l)
            if best is None:
                best = (w0, left, np.array([w0]), h)
            continue
        right, h, st_r = _leg(fluxes.right, s, w0, ur, False, x_span, lo, hi, profile_tol)
        statuses.append(st_r)
        if st_r == "reached":
            best = (w0, left, right, h)
            verdict = "connects"
            break
        if best is None:
            best = (w0, left, right, h)
    else:
        verdict = "inconclusive" if "running" in statuses else "diverges"
    w0, left, right, h = best
    xi = np.concatenate([-h * np.arange(len(left))[::-1], h * np.arange(1, len(right))])
    w = np.concatenate([left[::-1], right[1:]])
    xi, w = _thin(xi, w)
    return Profile(xi, w, verdict, (float(left[-1]), float(right[-1])), p, float(w0),
                   {"x_span": x_span, "profile_tol": profile_tol})


# -- smoothed flux ------------------------------------------------------------------

def _blend(y: float) -> float:
    return min(1.0, max(0.0, 0.5 * (1.0 - y)))


def smoothed_profile(fluxes: FluxPair, pair, eps: float, delta: float, x_span: float = 100.0,
                     profile_tol: float = PROFILE_TOL, rh_tol: float = RH_TOL,
                     layer_steps: int = 2000) -> Profile:
    """Stationary profile of eps U' = delta (F(y, U) - s) with a blended flux.

    F(y, .) = a f^l + (1 - a) f^r with a = clamp((1 - y)/2, 0, 1).  The
    abscissa of the result is the stretched variable xi = y delta / eps, so
    profiles compare directly with ``standing_wave``.
    """
    if not (eps > 0 and delta > 0):
        raise ValidationError("eps and delta must be positive")
    ul, ur, s = _check_rh(fluxes, pair, rh_tol)
    p = StatePair(ul, ur)
    lo, hi = min(ul, ur), max(ul, ur)
    L = max(fluxes.left.lipschitz_bound(Interval(lo, hi)), fluxes.right.lipschitz_bound(Interval(lo, hi)))
    if L > 0 and delta / eps > 2.0 / L * (1 + 1e-12):
        raise CFLRatioViolated(f"delta/eps = {delta / eps} exceeds 2/L = {2.0 / L}")
    if hi - lo <= profile_tol:
        return Profile(np.array([-x_span, x_span]), np.array([ul, ur]), "connects", (ul, ur), p, ul)
    r = delta / eps
    fl, fr = fluxes.left, fluxes.right

    def rhs(xi, u):
        a = _blend(xi / r)
        u = min(hi, max(lo, u))
        return a * fl(u) + (1 - a) * fr(u) - s

    def layer(u, start, stop):
        # fixed-step RK4 across the blending layer, clamped
        n = layer_steps
        hh = (stop - start) / n
        xs = [start]
        us = [u]
        for k in range(n):
            t = start + k * hh
            k1 = rhs(t, u)
            k2 = rhs(t + 0.5 * hh, u + 0.5 * hh * k1)
            k3 = rhs(t + 0.5 * hh, u + 0.5 * hh * k2)
            k4 = rhs(t + hh, u + hh * k3)
            nxt = u + hh * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            if nxt < lo - profile_tol or nxt > hi + profile_tol:
                return np.array(xs), np.array(us), True
            u = min(hi, max(lo, nxt))
            xs.append(t + hh)
            us.append(u)
        return np.array(xs), np.array(us), False

    def right_anchored(w0):
        # U(r) = w0: forward leg to u^r, layer back to -r, backward leg to u^l
        wr, hr, st = _leg(fr, s, w0, ur, False, x_span, lo, hi, profile_tol)
        if st != "reached":
            return st, None
        xs, us, out = layer(w0, r, -r)
        if out:
            return "exited", None
        wl, hl, st = _leg(fl, s, float(us[-1]), ul, True, x_span, lo, hi, profile_tol)
        xi = np.concatenate([xs[-1] - hl * np.arange(len(wl))[::-1], xs[::-1][1:],
                             r + hr * np.arange(1, len(wr))])
        ww = np.concatenate([wl[::-1], us[::-1][1:], wr[1:]])
        return st, (xi, ww, (float(wl[-1]), float(wr[-1])))

    def left_anchored(w0):
        # U(-r) = w0: backward leg to u^l, layer to r, forward leg to u^r
        wl, hl, st = _leg(fl, s, w0, ul, True, x_span, lo, hi, profile_tol)
        if st != "reached":
            return st, None
        xs, us, out = layer(w0, -r, r)
        if out:
            return "exited", None
        wr, hr, st = _leg(fr, s, float(us[-1]), ur, False, x_span, lo, hi, profile_tol)
        xi = np.concatenate([-r - hl * np.arange(len(wl))[::-1], xs[1:],
                             xs[-1] + hr * np.arange(1, len(wr))])
        ww = np.concatenate([wl[::-1], us[1:], wr[1:]])
        return st, (xi, ww, (float(wl[-1]), float(wr[-1])))

    statuses = []
    partial = None
    candidates = [ur, ul] + [ul + t * (ur - ul) for t in _INTERIOR]
    for name, attempt in (("right-anchored", right_anchored), ("left-anchored", left_anchored)):
        for w0 in candidates:
            st, res = attempt(w0)
            statuses.append(st)
            if res is None:
                continue
            xi, ww = _thin(res[0], res[1])
            if st == "reached":
                return Profile(xi, ww, "connects", res[2], p, float(w0),
                               {"variant": name, "eps": eps, "delta": delta})
            if partial is None:
                partial = (xi, ww, res[2])
    verdict = "inconclusive" if "running" in statuses else "diverges"
    if partial is None:
        return Profile(np.array([0.0]), np.array([ur]), verdict, (ur, ur), p, None,
                       {"eps": eps, "delta": delta})
    xi, ww, limits = partial
    return Profile(xi, ww, verdict, limits, p, None, {"eps": eps, "delta": delta})


# -- adapted viscosity --------------------------------------------------------------

@dataclass(frozen=True)
class ViscosityPair:
    a_left: PiecewiseLinearFlux
    a_right: PiecewiseLinearFlux
    kappa: float | None = None
    A: float | None = None
    B: float | None = None

    @property
    def max_slope(self) -> float:
        return max(self.a_left.lipschitz_bound(), self.a_right.lipschitz_bound())

    @property
    def min_slope(self) -> float:
        return float(min(self.a_left.slopes.min(), self.a_right.slopes.min()))

    @property
    def is_identity(self) -> bool:
        return all(np.allclose(a.f, a.u, atol=1e-15) for a in (self.a_left, self.a_right))

    def to_dict(self) -> dict:
        return {
            "a_left": self.a_left.to_literal(),
            "a_right": self.a_right.to_literal(),
            "kappa": self.kappa,
            "A": self.A,
            "B": self.B,
        }


def identity_viscosity(fluxes: FluxPair) -> ViscosityPair:
    lo, hi = fluxes.domain.lo, fluxes.domain.hi
    ident = PiecewiseLinearFlux([(lo, lo), (hi, hi)])
    return ViscosityPair(ident, ident)


def adapted_viscosity(fluxes: FluxPair, A: float, B: float, kappa: float,
                      rh_tol: float = RH_TOL, slope_floor: float = 1e-12) -> ViscosityPair:
    """Piecewise-affine increasing a^l, a^r with a^l(A) = kappa = a^r(B)."""
    lo, hi = fluxes.domain.lo, fluxes.domain.hi
    A, B, kappa = float(A), float(B), float(kappa)
    if abs(fluxes.left(A) - fluxes.right(B)) > rh_tol:
        raise RHViolation(f"({A}, {B}) violates Rankine-Hugoniot")
    ident = PiecewiseLinearFlux([(lo, lo), (hi, hi)])
    if abs(A - hi) <= 1e-15 and abs(B - lo) <= 1e-15:
        if kappa != lo:
            raise ValidationError(f"the extremal connection ({hi}, {lo}) takes kappa = {lo}")
        return ViscosityPair(ident, ident, kappa, A, B)
    if not lo < kappa < hi:
        raise ValidationError(f"kappa must lie strictly inside ({lo}, {hi})")

    def build(c: float, side: str) -> PiecewiseLinearFlux:
        if c <= lo or c >= hi:
            raise DegenerateSlope(
                f"{side} node {c} sits on the state boundary; a flat segment would result")
        return PiecewiseLinearFlux([(lo, lo), (c, kappa), (hi, hi)])

    pair = ViscosityPair(build(A, "left"), build(B, "right"), kappa, A, B)
    if pair.min_slope <= slope_floor:
        raise DegenerateSlope(f"viscosity slope {pair.min_slope} below floor {slope_floor}")
    return pair


# -- parabolic solver ---------------------------------------------------------------

def _convective_interface(fluxes: FluxPair, visc: ViscosityPair, germ):
    if germ is not None:
        return make_interface_flux(germ, fluxes)
    if fluxes.same:
        return fluxes.left.godunov
    if visc.A is not None and is_bell(fluxes):
        return make_interface_flux(GermSpec("ABDual", fluxes, {"A": visc.A, "B": visc.B}), fluxes)
    return make_interface_flux(GermSpec("VV", fluxes), fluxes)


def run_parabolic(fluxes: FluxPair, visc: ViscosityPair | None, eps: float, mesh: MeshConfig,
                  u0, t_end: float | None = None, cfl_fraction: float | None = None,
                  dt: float | None = None, n_steps: int | None = None, germ=None) -> GridSolution:
    """Explicit conservative march of u_t + f(x,u)_x = eps a(x,u)_xx.

    Convection uses the mesh's bulk flux on each side and a germ flux at the
    interface face; diffusion is the central difference of the side-wise
    a(u), taking one-sided values across x = 0.
    """
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    if visc is None:
        visc = identity_viscosity(fluxes)
    t_end = mesh.t_end if t_end is None else float(t_end)
    if cfl_fraction is None:
        cfl_fraction = mesh.cfl_fraction if eps == 0 else min(mesh.cfl_fraction, 0.5)
    data = _as_initial(u0)
    edges = mesh.edges()
    x = 0.5 * (edges[1:] + edges[:-1])
    n_left = mesh.cells_per_side
    dom = fluxes.domain
    u = np.ascontiguousarray(data.cell_averages(edges), dtype=float)
    if u.min() < dom.lo - 1e-12 or u.max() > dom.hi + 1e-12:
        raise ValidationError("initial data leave the flux state interval")
    u = np.clip(u, dom.lo, dom.hi)
    dx = mesh.dx
    env = (dom, dom)
    L = max(fluxes.left.lipschitz_bound(), fluxes.right.lipschitz_bound())
    amax = visc.max_slope
    if dt is None:
        dt = cfl_timestep(fluxes, env, dx, cfl_fraction, t_end if n_steps is None else None)
        if eps > 0:
            dt = min(dt, cfl_fraction * dx * dx / (2.0 * eps * amax))
        if not math.isfinite(dt):
            dt = dx
        if n_steps is None:
            n_steps = max(1, math.ceil(t_end / dt - 1e-12))
            dt = t_end / n_steps
    elif n_steps is None:
        n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    lam = dt / dx
    mu = eps * dt / (dx * dx)
    if 2 * lam * L + 2 * mu * amax > 1 + 1e-12:
        raise StabilityViolation(
            f"explicit bound violated: 2 lam L + 2 mu a' = {2 * lam * L + 2 * mu * amax:.6g} > 1")
    iface = _convective_interface(fluxes, visc, germ)
    kind = kernels.FLUX_KINDS[mesh.num_flux]
    xl, fl_, xr, fr_ = (np.ascontiguousarray(a) for a in
                        (fluxes.left.u, fluxes.left.f, fluxes.right.u, fluxes.right.f))
    axl, afl, axr, afr = (np.ascontiguousarray(a) for a in
                          (visc.a_left.u, visc.a_left.f, visc.a_right.u, visc.a_right.f))
    alpha_l, alpha_r = fluxes.left.lipschitz_bound(), fluxes.right.lipschitz_bound()
    stride = max(1, math.ceil(n_steps / (mesh.max_snapshots - 1)))
    snaps, snap_t = [u.copy()], [0.0]
    trace_l = np.empty(n_steps + 1)
    trace_r = np.empty(n_steps + 1)
    iflux = np.empty(n_steps)
    bflux = np.empty((n_steps, 2))
    trace_l[0], trace_r[0] = u[n_left - 1], u[n_left]
    nxt = np.empty_like(u)
    clamped = 0
    for k in range(n_steps):
        s = iface(float(u[n_left - 1]), float(u[n_left]))
        iflux[k] = s
        bflux[k] = kernels.parabolic_step(u, nxt, xl, fl_, xr, fr_, axl, afl, axr, afr,
                                          n_left, lam, mu, s, kind, alpha_l, alpha_r)
        u, nxt = nxt, u
        bad = (u < dom.lo) | (u > dom.hi)
        if bad.any():
            clamped += int(bad.sum())
            np.clip(u, dom.lo, dom.hi, out=u)
        trace_l[k + 1], trace_r[k + 1] = u[n_left - 1], u[n_left]
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            snaps.append(u.copy())
            snap_t.append((k + 1) * dt)
    if clamped:
        log.warning("clamped %d out-of-domain cell values", clamped)
    return GridSolution(
        dx=dx, dt=dt, x=x, times=np.asarray(snap_t), field=np.asarray(snaps),
        step_times=dt * np.arange(n_steps + 1), trace_left=trace_l, trace_right=trace_r,
        interface_flux_series=iflux, boundary_flux=bflux, envelope=None,
        meta={"backend": kernels.BACKEND, "eps": eps, "clamped": clamped, "stride": stride,
              "num_flux": mesh.num_flux},
    )
