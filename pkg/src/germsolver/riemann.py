"""Classical and interface Riemann solvers.

The classical fan for one flux comes from the lower convex (u- < u+) or
upper concave (u- > u+) envelope of the flux on the data interval; for a
piecewise-linear flux the envelope is a finite hull and every wave speed is
a chord slope.

The interface solver looks for germ pairs (u^l, u^r) such that u- can be
joined to u^l by waves of nonpositive speed and u^r to u+ by waves of
nonnegative speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AmbiguousFlux, Incomplete, OutOfDomain
from .flux import FluxPair, Interval, PiecewiseLinearFlux

SPEED_TOL = 1e-9

__all__ = [
    "Wave",
    "RiemannFan",
    "InterfaceSolution",
    "solve_classical",
    "theta_domain",
    "solve_interface",
    "interface_candidates",
    "eval_fan",
    "reachable_mask",
    "SPEED_TOL",
]


@dataclass(frozen=True)
class Wave:
    """One wave of a fan.

    For a rarefaction, ``states`` lists the envelope vertices crossed from
    left to right and ``speeds`` the chord slopes between them; the state
    for speeds between ``speeds[j]`` and ``speeds[j+1]`` is ``states[j+1]``.
    """

    kind: str
    speed_lo: float
    speed_hi: float
    value_left: float
    value_right: float
    states: tuple = ()
    speeds: tuple = ()

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "speed_lo": self.speed_lo,
            "speed_hi": self.speed_hi,
            "value_left": self.value_left,
            "value_right": self.value_right,
        }
        if self.kind == "rarefaction":
            d["states"] = list(self.states)
            d["speeds"] = list(self.speeds)
        return d


@dataclass(frozen=True)
class RiemannFan:
    u_minus: float
    u_plus: float
    waves: tuple = ()

    @property
    def empty(self) -> bool:
        return not self.waves

    @property
    def speed_min(self) -> float:
        return self.waves[0].speed_lo if self.waves else 0.0

    @property
    def speed_max(self) -> float:
        return self.waves[-1].speed_hi if self.waves else 0.0

    def jumps(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (speeds, states): state k holds on [speeds[k-1], speeds[k])."""
        speeds: list[float] = []
        states: list[float] = [self.u_minus]
        for w in self.waves:
            if w.kind == "rarefaction":
                speeds.extend(w.speeds)
                states.extend(w.states[1:])
            else:
                speeds.append(w.speed_lo)
                states.append(w.value_right)
        return np.asarray(speeds, dtype=float), np.asarray(states, dtype=float)

    def __call__(self, xi):
        speeds, states = self.jumps()
        idx = np.searchsorted(speeds, xi, side="right")
        out = states[idx]
        return float(out) if np.ndim(xi) == 0 else out

    def to_dict(self) -> dict:
        return {
            "u_minus": self.u_minus,
            "u_plus": self.u_plus,
            "waves": [w.to_dict() for w in self.waves],
        }


@dataclass(frozen=True)
class InterfaceSolution:
    ul: float
    ur: float
    left_fan: RiemannFan
    right_fan: RiemannFan
    interface_flux: float
    matches: tuple = field(default=(), compare=False)

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        xi = x / t
        out = np.where(x < 0, self.left_fan(np.minimum(xi, 0.0)),
                       self.right_fan(np.maximum(xi, 0.0)))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "ul": self.ul,
            "ur": self.ur,
            "interface_flux": self.interface_flux,
            "left_fan": self.left_fan.to_dict(),
            "right_fan": self.right_fan.to_dict(),
        }


def _hull(xs: list[float], ys: list[float], lower: bool) -> list[int]:
    """Monotone-chain hull indices of points sorted by x."""
    h: list[int] = []
    sgn = 1.0 if lower else -1.0
    for k in range(len(xs)):
        while len(h) >= 2:
            i, j = h[-2], h[-1]
            cross = (xs[j] - xs[i]) * (ys[k] - ys[i]) - (ys[j] - ys[i]) * (xs[k] - xs[i])
            if sgn * cross <= 0:
                h.pop()
            else:
                break
        h.append(k)
    return h


def solve_classical(flux: PiecewiseLinearFlux, u_minus: float, u_plus: float,
                    tol: float = 1e-12) -> RiemannFan:
    """Entropy fan for u_t + f(u)_x = 0 with Riemann data (u_minus, u_plus)."""
    u_minus = flux._check(float(u_minus))
    u_plus = flux._check(float(u_plus))
    if u_minus == u_plus:
        return RiemannFan(u_minus, u_plus, ())
    lower = u_minus < u_plus
    a, b = (u_minus, u_plus) if lower else (u_plus, u_minus)
    i, j = flux._inner(a, b)
    xs = [a] + flux._ul[i:j] + [b]
    ys = [flux._eval_scalar(x) for x in xs]
    hidx = _hull(xs, ys, lower)
    edges = []  # (x0, x1, slope, linear?)
    for p, q in zip(hidx[:-1], hidx[1:]):
        x0, x1 = xs[p], xs[q]
        slope = (ys[q] - ys[p]) / (x1 - x0)
        linear = all(
            abs(ys[k] - (ys[p] + slope * (xs[k] - x0))) <= tol * max(1.0, abs(ys[k]))
            for k in range(p + 1, q)
        )
        edges.append((x0, x1, slope, linear))
    if not lower:
        # traverse from u_minus (high) down to u_plus: reverse edges
        edges = [(x1, x0, s, lin) for (x0, x1, s, lin) in reversed(edges)]
    waves: list[Wave] = []
    k = 0
    while k < len(edges):
        x0, x1, s, lin = edges[k]
        if not lin:
            waves.append(Wave("shock", s, s, x0, x1))
            k += 1
            continue
        m = k
        while m + 1 < len(edges) and edges[m + 1][3]:
            m += 1
        group = edges[k:m + 1]
        if len(group) == 1:
            waves.append(Wave("contact", s, s, x0, x1))
        else:
            states = tuple([group[0][0]] + [e[1] for e in group])
            speeds = tuple(e[2] for e in group)
            waves.append(Wave("rarefaction", speeds[0], speeds[-1], states[0],
                              states[-1], states, speeds))
        k = m + 1
    return RiemannFan(u_minus, u_plus, tuple(waves))


def eval_fan(fan, t, x=None):
    """Evaluate a fan or interface solution.

    ``eval_fan(fan, t, x)`` uses ξ = x/t; ``eval_fan(fan, xi)`` with a single
    argument evaluates a ``RiemannFan`` at the self-similar variable.
    """
    if x is None:
        return fan(t)
    if isinstance(fan, InterfaceSolution):
        return fan(t, x)
    return fan(np.asarray(x, dtype=float) / t) if np.ndim(x) else fan(float(x) / t)


def theta_domain(flux: PiecewiseLinearFlux, side: str, ustar: float,
                 speed_tol: float = SPEED_TOL) -> list[Interval]:
    """States joined to ``ustar`` by a one-sided fan.

    side="left": all u with solve_classical(flux, u, ustar) of nonpositive
    speeds; side="right": all u with solve_classical(flux, ustar, u) of
    nonnegative speeds.  Zero-speed waves are admitted up to ``speed_tol``.
    """
    b = flux._check(float(ustar))
    s = flux._eval_scalar(b)
    lo, hi = flux.domain.lo, flux.domain.hi
    if side == "left":
        x_lo = flux.extent(b, lo, s, ">=", speed_tol)
        x_hi = flux.extent(b, hi, s, "<=", speed_tol)
    elif side == "right":
        x_lo = flux.extent(b, lo, s, "<=", speed_tol)
        x_hi = flux.extent(b, hi, s, ">=", speed_tol)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return [Interval(x_lo, x_hi)]


def _run_extrema(flux: PiecewiseLinearFlux, datum: float, outward: int):
    """Nodes from ``datum`` outward with running min and max of the flux."""
    us = flux.u
    if outward > 0:
        k = np.searchsorted(us, datum, side="right")
        xs = np.concatenate([[datum], us[k:]])
    else:
        k = np.searchsorted(us, datum, side="left")
        xs = np.concatenate([[datum], us[:k][::-1]])
    vals = flux(xs)
    return xs, np.minimum.accumulate(vals), np.maximum.accumulate(vals)


def reachable_mask(flux: PiecewiseLinearFlux, side: str, datum: float, states,
                   speed_tol: float = SPEED_TOL) -> np.ndarray:
    """Vectorized test ``datum ∈ theta_domain(flux, side, b)`` for each b."""
    b = np.asarray(states, dtype=float)
    fb = flux(b)
    datum = flux._check(float(datum))
    out = np.zeros(b.shape, dtype=bool)
    above = b >= datum
    below = ~above
    # left side: b above datum -> flux >= f(b) on [datum, b]; below -> flux <= f(b)
    # right side: b below datum -> flux >= f(b) on [b, datum]; above -> flux <= f(b)
    need_min_above = side == "left"
    for mask, outward in ((above, 1), (below, -1)):
        if not mask.any():
            continue
        xs, rmin, rmax = _run_extrema(flux, datum, outward)
        bb = b[mask]
        if outward > 0:
            k = np.searchsorted(xs, bb, side="right") - 1
        else:
            k = np.searchsorted(-xs, -bb, side="right") - 1
        k = np.clip(k, 0, len(xs) - 1)
        use_min = need_min_above if outward > 0 else not need_min_above
        if use_min:
            out[mask] = rmin[k] >= fb[mask] - speed_tol
        else:
            out[mask] = rmax[k] <= fb[mask] + speed_tol
    return out


def _reachable_levels(fluxes: FluxPair, um: float, up: float) -> tuple[float, float]:
    fl, fr = fluxes.left, fluxes.right
    lo, hi = fluxes.domain.lo, fluxes.domain.hi
    l_lo, l_hi = fl.min_on(um, hi), fl.max_on(lo, um)
    r_lo, r_hi = fr.min_on(lo, up), fr.max_on(up, hi)
    return max(l_lo, r_lo), min(l_hi, r_hi)


def interface_candidates(g, fluxes: FluxPair, um: float, up: float,
                         speed_tol: float = SPEED_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Germ pairs whose one-sided fans reach the datum (um, up)."""
    fl, fr = fluxes.left, fluxes.right
    uls: list[np.ndarray] = []
    urs: list[np.ndarray] = []
    pairs = getattr(g, "pairs_array", None)
    if pairs is not None and len(pairs):
        mask = reachable_mask(fl, "left", um, pairs[:, 0], speed_tol)
        if mask.any():
            mask[mask] = reachable_mask(fr, "right", up, pairs[mask, 1], speed_tol)
        uls.append(pairs[mask, 0])
        urs.append(pairs[mask, 1])
    spec = g if hasattr(g, "level_table") else getattr(g, "spec", None)
    if spec is not None and hasattr(spec, "level_table") and spec.enumerable:
        s_lo, s_hi = _reachable_levels(fluxes, um, up)
        tol = spec.rh_tol
        if s_lo <= s_hi + tol:
            levels, lpts, rpts = spec.level_table(extra_levels=(fl(um), fr(up)),
                                                  extra_left=(um,), extra_right=(up,))
            i0 = np.searchsorted(levels, s_lo - tol, side="left")
            i1 = np.searchsorted(levels, s_hi + tol, side="right")
            idx = range(i0, i1)
            cand_l: list[np.ndarray] = []
            cand_r: list[np.ndarray] = []
            if i1 > i0:
                # one reachability pass per side over all levels at once
                lid = np.concatenate([np.full(len(lpts[i]), i) for i in idx])
                rid = np.concatenate([np.full(len(rpts[i]), i) for i in idx])
                lall = np.concatenate([lpts[i] for i in idx])
                rall = np.concatenate([rpts[i] for i in idx])
                lok = reachable_mask(fl, "left", um, lall, speed_tol) if len(lall) else lall.astype(bool)
                rok = reachable_mask(fr, "right", up, rall, speed_tol) if len(rall) else rall.astype(bool)
                lid, lall = lid[lok], lall[lok]
                rid, rall = rid[rok], rall[rok]
                for i in np.intersect1d(lid, rid):
                    a = lall[lid == i]
                    b = rall[rid == i]
                    cand_l.append(np.repeat(a, len(b)))
                    cand_r.append(np.tile(b, len(a)))
            if cand_l:
                cl = np.concatenate(cand_l)
                cr = np.concatenate(cand_r)
                keep = spec.contains_many(cl, cr)
                uls.append(cl[keep])
                urs.append(cr[keep])
    if not uls:
        return np.empty(0), np.empty(0)
    return np.concatenate(uls), np.concatenate(urs)


def solve_interface(g, fluxes: FluxPair | None, u_minus: float, u_plus: float,
                    speed_tol: float = SPEED_TOL) -> InterfaceSolution:
    """Resolve the Riemann datum (u_minus, u_plus) with germ ``g``.

    ``g`` is a germ sample or a germ predicate; a sample that remembers its
    predicate is refined at the levels relevant to the datum.
    """
    if fluxes is None:
        fluxes = g.fluxes
    dom = fluxes.domain
    for u in (u_minus, u_plus):
        if not dom.contains(u):
            raise OutOfDomain(f"datum state {u!r} outside [{dom.lo}, {dom.hi}]")
    um = min(max(float(u_minus), dom.lo), dom.hi)
    up = min(max(float(u_plus), dom.lo), dom.hi)
    ul, ur = interface_candidates(g, fluxes, um, up, speed_tol)
    if not len(ul):
        raise Incomplete(u_minus, u_plus, getattr(g, "resolution", None))
    fl, fr = fluxes.left, fluxes.right
    svals = fl(ul)
    rh_tol = getattr(g, "rh_tol", 1e-9)
    if svals.max() - svals.min() > 10 * rh_tol:
        raise AmbiguousFlux(u_minus, u_plus, svals.tolist(),
                            list(zip(ul.tolist(), ur.tolist())))
    cost = np.abs(ul - um) + np.abs(ur - up)
    k = int(np.argmin(cost))
    a, b = float(ul[k]), float(ur[k])
    return InterfaceSolution(
        a, b,
        solve_classical(fl, um, a),
        solve_classical(fr, b, up),
        float(fl(a)),
        tuple(zip(ul.tolist(), ur.tolist())),
    )
