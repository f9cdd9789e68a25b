"""Explicit monotone finite-volume scheme with a Godunov germ flux at x = 0.

Cells are indexed so that cells i <= 0 lie left of the interface and cells
i >= 1 right of it; cell i covers ((i-1) dx, i dx).  In the arrays below
the interface sits between positions ``n_left - 1`` (cell 0) and
``n_left`` (cell 1).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import EnvelopeViolation, MeshMismatch, ValidationError
from .flux import FluxPair, Interval
from .germ import GermSample, GermSpec, is_bell
from .riemann import InterfaceSolution, solve_interface

ENVELOPE_TOL = 1e-10

__all__ = [
    "MeshConfig",
    "GridSolution",
    "InitialData",
    "Constant",
    "RiemannData",
    "PiecewiseConstant",
    "Samples",
    "CellAverages",
    "FunctionData",
    "cfl_timestep",
    "interface_flux",
    "make_interface_flux",
    "step",
    "run",
    "linfty_envelope",
    "grid_from_solution",
]


@dataclass(frozen=True)
class MeshConfig:
    dx: float
    x_extent: float
    t_end: float
    cfl_fraction: float = 1.0
    num_flux: str = "godunov"
    n_steps: int | None = None
    max_snapshots: int = 2001

    def __post_init__(self):
        errs = []
        if not self.dx > 0:
            errs.append("dx must be positive")
        if not self.x_extent > 0:
            errs.append("x_extent must be positive")
        if self.n_steps is None and not self.t_end > 0:
            errs.append("t_end must be positive")
        if not 0 < self.cfl_fraction <= 1:
            errs.append("cfl_fraction must lie in (0, 1]")
        if self.num_flux not in kernels.FLUX_KINDS:
            errs.append(f"num_flux must be one of {sorted(kernels.FLUX_KINDS)}")
        if self.n_steps is not None and self.n_steps < 1:
            errs.append("n_steps must be at least 1")
        if self.max_snapshots < 2:
            errs.append("max_snapshots must be at least 2")
        if not errs:
            ratio = self.x_extent / self.dx
            if abs(ratio - round(ratio)) > 1e-6 * max(1.0, ratio):
                errs.append("x_extent must be a whole number of cells")
        if errs:
            raise ValidationError(errs)

    @property
    def cells_per_side(self) -> int:
        return int(round(self.x_extent / self.dx))

    def edges(self) -> np.ndarray:
        n = self.cells_per_side
        return self.dx * np.arange(-n, n + 1, dtype=float)

    def centers(self) -> np.ndarray:
        e = self.edges()
        return 0.5 * (e[1:] + e[:-1])

    def to_dict(self) -> dict:
        d = {
            "dx": self.dx,
            "x_extent": self.x_extent,
            "t_end": self.t_end,
            "cfl_fraction": self.cfl_fraction,
            "num_flux": self.num_flux,
            "max_snapshots": self.max_snapshots,
        }
        if self.n_steps is not None:
            d["n_steps"] = self.n_steps
        return d


@dataclass
class GridSolution:
    """Space-time field on an interface-aligned mesh."""

    dx: float
    dt: float
    x: np.ndarray
    times: np.ndarray
    field: np.ndarray
    step_times: np.ndarray
    trace_left: np.ndarray
    trace_right: np.ndarray
    interface_flux_series: np.ndarray
    boundary_flux: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    envelope: tuple | None = None
    conservation_defect: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_left(self) -> int:
        return int(np.count_nonzero(self.x < 0))

    @property
    def n_cells(self) -> int:
        return len(self.x)

    @property
    def u0(self) -> np.ndarray:
        return self.field[0]

    @property
    def final(self) -> np.ndarray:
        return self.field[-1]

    def mass(self) -> np.ndarray:
        return self.field.sum(axis=1) * self.dx

    def check_same_mesh(self, other: "GridSolution") -> None:
        if (len(self.x) != len(other.x) or not np.allclose(self.x, other.x, atol=1e-12)
                or len(self.times) != len(other.times)
                or not np.allclose(self.times, other.times, rtol=1e-12, atol=1e-14)):
            raise MeshMismatch("solutions live on different space-time meshes")

    def report(self) -> dict:
        env = None
        if self.envelope is not None:
            env = {"left": list(self.envelope[0]), "right": list(self.envelope[1])}
        return {
            "dx": self.dx,
            "dt": self.dt,
            "n_cells": self.n_cells,
            "n_steps": int(len(self.interface_flux_series)),
            "t_end": float(self.times[-1]),
            "envelope": env,
            "conservation_defect": self.conservation_defect,
            "total_boundary_flux": float(
                self.dt * np.sum(self.boundary_flux[:, 1] - self.boundary_flux[:, 0]))
            if len(self.boundary_flux) else 0.0,
            **self.meta,
        }


# -- initial data -----------------------------------------------------------------

class InitialData:
    """Initial datum; subclasses supply exact cell averages where possible."""

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[float, float] | None:
        return None


@dataclass(frozen=True)
class Constant(InitialData):
    value: float

    def cell_averages(self, edges):
        return np.full(len(edges) - 1, float(self.value))

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value))


@dataclass(frozen=True)
class PiecewiseConstant(InitialData):
    """``values[k]`` on (breaks[k-1], breaks[k]) with breaks sorted."""

    breaks: tuple
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.breaks) + 1:
            raise ValidationError("piecewise data needs len(values) == len(breaks) + 1")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValidationError("piecewise breaks must be strictly increasing")

    def __call__(self, x):
        idx = np.searchsorted(np.asarray(self.breaks, dtype=float), x, side="right")
        return np.asarray(self.values, dtype=float)[idx]

    def cell_averages(self, edges):
        # integrate the step function exactly: primitive is piecewise linear
        br = np.asarray(self.breaks, dtype=float)
        vals = np.asarray(self.values, dtype=float)

        def primitive(x):
            x = np.asarray(x, dtype=float)
            out = vals[0] * x
            for k, b in enumerate(br):
                out = out + (vals[k + 1] - vals[k]) * np.maximum(x - b, 0.0)
            return out

        P = primitive(edges)
        return np.diff(P) / np.diff(edges)


def RiemannData(u_minus: float, u_plus: float, x0: float = 0.0) -> PiecewiseConstant:
    return PiecewiseConstant((float(x0),), (float(u_minus), float(u_plus)))


@dataclass(frozen=True)
class Samples(InitialData):
    """Linear interpolant of (x, u) samples, constant beyond the ends."""

    xs: tuple
    us: tuple

    def __call__(self, x):
        return np.interp(x, self.xs, self.us)

    def cell_averages(self, edges):
        xs = np.asarray(self.xs, dtype=float)
        us = np.asarray(self.us, dtype=float)
        grid = np.union1d(edges, xs[(xs > edges[0]) & (xs < edges[-1])])
        vals = np.interp(grid, xs, us)
        prim = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid))])
        P = np.interp(edges, grid, prim)
        return np.diff(P) / np.diff(edges)


class CellAverages(InitialData):
    """Cell values given directly; their count must match the mesh."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def cell_averages(self, edges):
        if len(self.values) != len(edges) - 1:
            raise ValidationError(
                f"{len(self.values)} cell values for a mesh of {len(edges) - 1} cells")
        return self.values.copy()


@dataclass(frozen=True)
class FunctionData(InitialData):
    """Arbitrary callable, averaged by composite Simpson on each cell."""

    fn: Callable
    sub: int = 8

    def __call__(self, x):
        return self.fn(x)

    def cell_averages(self, edges):
        m = 2 * self.sub
        t = np.linspace(0.0, 1.0, m + 1)
        w = np.ones(m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w /= 3.0 * m
        pts = edges[:-1, None] + np.diff(edges)[:, None] * t[None, :]
        return (np.asarray(self.fn(pts), dtype=float) * w[None, :]).sum(axis=1)


def _as_initial(u0) -> InitialData:
    if isinstance(u0, InitialData):
        return u0
    if callable(u0):
        return FunctionData(u0)
    if np.ndim(u0) == 0:
        return Constant(float(u0))
    if np.ndim(u0) == 1:
        return CellAverages(u0)
    raise ValidationError(f"cannot interpret initial data {u0!r}")


# -- interface flux ----------------------------------------------------------------

def _debug_enabled() -> bool:
    return os.environ.get("GERMSOLVER_DEBUG", "") not in ("", "0")


def _solver_germ(g):
    if isinstance(g, GermSpec):
        return g.maximal()
    return g


def _fast_rule(g, fluxes: FluxPair):
    spec = g if isinstance(g, GermSpec) else getattr(g, "spec", None)
    if isinstance(g, GermSample) and spec is not None and spec.kind in ("Explicit", "Dual"):
        spec = None
    if spec is None:
        return None
    if spec.kind in ("ABDual",) or (spec.kind == "Connection" and is_bell(fluxes)):
        A, B = spec.A, spec.B
        fl, fr = fluxes.left, fluxes.right
        return lambda uL, uR: min(fl.godunov(uL, A), fr.godunov(B, uR))
    if spec.kind in ("VV", "KRT") and fluxes.same:
        f = fluxes.left
        return f.godunov
    return None


def make_interface_flux(g, fluxes: FluxPair | None = None, check: bool | None = None):
    """Callable (uL, uR) -> interface flux for germ ``g`` (memoized)."""
    if fluxes is None:
        fluxes = g.fluxes
    fast = _fast_rule(g, fluxes)
    solver_g = _solver_germ(g)
    check = _debug_enabled() if check is None else check
    rh_tol = getattr(g, "rh_tol", 1e-9)
    cache: dict = {}

    def generic(uL, uR):
        return solve_interface(solver_g, fluxes, uL, uR).interface_flux

    def value(uL: float, uR: float) -> float:
        key = (uL, uR)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if fast is not None:
            v = float(fast(uL, uR))
            if check:
                ref = generic(uL, uR)
                if abs(ref - v) > 10 * rh_tol:
                    raise AssertionError(
                        f"closed-form interface flux {v} differs from generic {ref} at ({uL}, {uR})")
        else:
            v = generic(uL, uR)
        if len(cache) < 100000:
            cache[key] = v
        return v

    value.fast = fast is not None
    return value


def interface_flux(g, fluxes: FluxPair | None, uL: float, uR: float, check: bool | None = None) -> float:
    """Godunov flux of the germ Riemann solution at the interface."""
    if fluxes is None:
        fluxes = g.fluxes
    return make_interface_flux(g, fluxes, check)(float(uL), float(uR))


# -- time stepping ---------------------------------------------------------------

def cfl_timestep(fluxes: FluxPair, envelope, dx: float, cfl_fraction: float = 1.0,
                 t_end: float | None = None) -> float:
    """dt = cfl_fraction * dx / (2 L), L the Lipschitz bound on the envelope."""
    env_l, env_r = envelope
    L = max(fluxes.left.lipschitz_bound(env_l), fluxes.right.lipschitz_bound(env_r))
    if L <= 0:
        return float(t_end) if t_end is not None else math.inf
    dt = cfl_fraction * dx / (2.0 * L)
    if t_end is not None:
        dt = min(dt, float(t_end))
    return dt


def linfty_envelope(g, fluxes: FluxPair | None, bounds: tuple[float, float]) -> tuple[Interval, Interval]:
    """Per-side invariant interval from the traces of the constant data m and M."""
    if fluxes is None:
        fluxes = g.fluxes
    m, M = float(bounds[0]), float(bounds[1])
    if m > M:
        m, M = M, m
    solver_g = _solver_germ(g)
    lo_sol = solve_interface(solver_g, fluxes, m, m)
    hi_sol = solve_interface(solver_g, fluxes, M, M)
    left = Interval(min(lo_sol.ul, m), max(hi_sol.ul, M))
    right = Interval(min(lo_sol.ur, m), max(hi_sol.ur, M))
    return left, right


def _flux_arrays(fluxes: FluxPair):
    fl, fr = fluxes.left, fluxes.right
    return (np.ascontiguousarray(fl.u), np.ascontiguousarray(fl.f),
            np.ascontiguousarray(fr.u), np.ascontiguousarray(fr.f))


def step(state, g, fluxes: FluxPair | None, dx: float, dt: float,
         num_flux: str = "godunov", n_left: int | None = None, iface=None) -> np.ndarray:
    """One explicit conservative update of all cells."""
    if fluxes is None:
        fluxes = g.fluxes
    u = np.ascontiguousarray(state, dtype=float)
    n = len(u)
    n_left = n // 2 if n_left is None else n_left
    if iface is None:
        iface = make_interface_flux(g, fluxes)
    out = np.empty_like(u)
    xl, fl, xr, fr = _flux_arrays(fluxes)
    alpha_l = fluxes.left.lipschitz_bound()
    alpha_r = fluxes.right.lipschitz_bound()
    s = iface(float(u[n_left - 1]), float(u[n_left])) if 0 < n_left < n else 0.0
    kernels.fv_step(u, out, xl, fl, xr, fr, n_left, dt / dx, s,
                    kernels.FLUX_KINDS[num_flux], alpha_l, alpha_r)
    return out


def _snapshot_stride(n_steps: int, max_snapshots: int) -> int:
    return max(1, math.ceil(n_steps / (max_snapshots - 1)))


def run(config: MeshConfig, g, fluxes: FluxPair | None, u0, check_envelope: bool = True) -> GridSolution:
    """March the scheme from cell averages of ``u0`` to ``config.t_end``."""
    if fluxes is None:
        fluxes = g.fluxes
    data = _as_initial(u0)
    edges = config.edges()
    x = 0.5 * (edges[1:] + edges[:-1])
    n = len(x)
    n_left = config.cells_per_side
    u = np.ascontiguousarray(data.cell_averages(edges), dtype=float)
    dom = fluxes.domain
    if u.min() < dom.lo - 1e-12 or u.max() > dom.hi + 1e-12:
        raise ValidationError("initial data leave the flux state interval")
    u = np.clip(u, dom.lo, dom.hi)
    m, M = float(u.min()), float(u.max())
    iface = make_interface_flux(g, fluxes)
    env = linfty_envelope(g, fluxes, (m, M))
    t_cap = config.t_end if config.n_steps is None else None
    dt = cfl_timestep(fluxes, env, config.dx, config.cfl_fraction, t_cap)
    if config.n_steps is not None:
        if not math.isfinite(dt):
            dt = config.dx
        n_steps = int(config.n_steps)
        t_end = n_steps * dt
    else:
        t_end = float(config.t_end)
        n_steps = max(1, math.ceil(t_end / dt - 1e-12))
        dt = t_end / n_steps
    stride = _snapshot_stride(n_steps, config.max_snapshots)
    xl, fl, xr, fr = _flux_arrays(fluxes)
    kind = kernels.FLUX_KINDS[config.num_flux]
    alpha_l = fluxes.left.lipschitz_bound(env[0])
    alpha_r = fluxes.right.lipschitz_bound(env[1])
    lam = dt / config.dx
    snaps = [u.copy()]
    snap_t = [0.0]
    trace_l = np.empty(n_steps + 1)
    trace_r = np.empty(n_steps + 1)
    iflux = np.empty(n_steps)
    bflux = np.empty((n_steps, 2))
    trace_l[0], trace_r[0] = u[n_left - 1], u[n_left]
    nxt = np.empty_like(u)
    defect = 0.0
    lo_l, hi_l = env[0].lo - ENVELOPE_TOL, env[0].hi + ENVELOPE_TOL
    lo_r, hi_r = env[1].lo - ENVELOPE_TOL, env[1].hi + ENVELOPE_TOL
    mass = u.sum() * config.dx
    for k in range(n_steps):
        s = iface(float(u[n_left - 1]), float(u[n_left]))
        iflux[k] = s
        g0, g1 = kernels.fv_step(u, nxt, xl, fl, xr, fr, n_left, lam, s, kind, alpha_l, alpha_r)
        bflux[k] = (g0, g1)
        u, nxt = nxt, u
        new_mass = u.sum() * config.dx
        expected = mass - dt * (g1 - g0)
        defect = max(defect, abs(new_mass - expected) / max(1.0, abs(mass)))
        mass = new_mass
        if check_envelope:
            left, right = u[:n_left], u[n_left:]
            if (left.min() < lo_l or left.max() > hi_l or right.min() < lo_r or right.max() > hi_r):
                raise EnvelopeViolation(
                    f"step {k + 1}: state left the predicted envelope "
                    f"{tuple(env[0])} / {tuple(env[1])}")
        # guard the flux domain against roundoff
        np.clip(u, dom.lo, dom.hi, out=u)
        trace_l[k + 1], trace_r[k + 1] = u[n_left - 1], u[n_left]
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            snaps.append(u.copy())
            snap_t.append((k + 1) * dt)
    return GridSolution(
        dx=config.dx,
        dt=dt,
        x=x,
        times=np.asarray(snap_t),
        field=np.asarray(snaps),
        step_times=dt * np.arange(n_steps + 1),
        trace_left=trace_l,
        trace_right=trace_r,
        interface_flux_series=iflux,
        boundary_flux=bflux,
        envelope=env,
        conservation_defect=float(defect),
        meta={"backend": kernels.BACKEND, "num_flux": config.num_flux, "stride": stride,
              "fast_interface": bool(getattr(iface, "fast", False))},
    )


def grid_from_solution(sol, config: MeshConfig, times: Sequence[float] | None = None,
                       n_times: int = 101) -> GridSolution:
    """Sample an exact self-similar solution onto the scheme mesh.

    ``sol`` is an ``InterfaceSolution`` or any callable (t, x) -> u.  Cells
    take midpoint values; the initial row uses the Riemann data.
    """
    edges = config.edges()
    x = 0.5 * (edges[1:] + edges[:-1])
    if times is None:
        times = np.linspace(0.0, config.t_end, n_times)
    times = np.asarray(times, dtype=float)
    rows = []
    for t in times:
        if t == 0.0:
            if isinstance(sol, InterfaceSolution):
                rows.append(np.where(x < 0, sol.left_fan.u_minus, sol.right_fan.u_plus))
            else:
                rows.append(np.asarray(sol(1e-300, x), dtype=float))
        else:
            rows.append(np.asarray(sol(t, x), dtype=float))
    field_ = np.asarray(rows)
    n_left = int(np.count_nonzero(x < 0))
    dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    iflux = np.full(max(len(times) - 1, 0),
                    sol.interface_flux if isinstance(sol, InterfaceSolution) else np.nan)
    return GridSolution(
        dx=config.dx, dt=dt, x=x, times=times, field=field_, step_times=times,
        trace_left=field_[:, n_left - 1].copy(), trace_right=field_[:, n_left].copy(),
        interface_flux_series=iflux, meta={"source": "exact"},
    )
