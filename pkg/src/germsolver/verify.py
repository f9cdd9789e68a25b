"""Residual checks of integral inequalities on discrete solutions.

Every residual is a signed number; negative values measure a violation.
Space integrals treat the cell values as piecewise constant and integrate
the piecewise-linear test function exactly; time integrals hold each
snapshot constant until the next one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import MeshMismatch, ValidationError
from .flux import FluxPair, Interval, PiecewiseLinearFlux
from .germ import GermSample, GermSpec, STATE_TOL, dual, germ_distance, remainder
from .riemann import solve_interface
from .scheme import GridSolution

KATO_C = 4.0

__all__ = [
    "TestBump",
    "ResidualReport",
    "kato_residual",
    "entropy_residual",
    "krt_residual",
    "weak_residual",
    "l1_contraction_report",
    "comparison_report",
    "max_principle_report",
    "trace_membership",
    "interface_dissipation",
    "continuous_dependence_report",
    "convergence_battery",
]


class TestBump:
    """xi(t, x) = phi(t) psi(x) with nonnegative piecewise-linear factors."""

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, t_nodes: Sequence[Sequence[float]], x_nodes: Sequence[Sequence[float]]):
        self.phi = self._profile(t_nodes, "time")
        self.psi = self._profile(x_nodes, "space")

    @staticmethod
    def _profile(nodes, what):
        arr = np.asarray(nodes, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
            raise ValidationError(f"{what} profile needs (coord, value) nodes")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise ValidationError(f"{what} profile abscissae must increase")
        if np.any(arr[:, 1] < 0):
            raise ValidationError(f"{what} profile must be nonnegative")
        return arr

    @classmethod
    def hat(cls, x0: float, x1: float, t1: float, t0: float = 0.0, x_peak: float | None = None,
            t_flat: float | None = None) -> "TestBump":
        """Tent in x on [x0, x1]; in time 1 on [t0, t_flat], decaying to 0 at t1."""
        xm = 0.5 * (x0 + x1) if x_peak is None else x_peak
        tf = 0.5 * (t0 + t1) if t_flat is None else t_flat
        t_nodes = [(t0, 1.0), (tf, 1.0), (t1, 0.0)]
        return cls(t_nodes, [(x0, 0.0), (xm, 1.0), (x1, 0.0)])

    def scaled(self, lam: float) -> "TestBump":
        return TestBump(self.phi, np.column_stack([self.psi[:, 0], lam * self.psi[:, 1]]))

    def phi_at(self, t):
        return np.interp(t, self.phi[:, 0], self.phi[:, 1], left=self.phi[0, 1], right=0.0)

    def psi_at(self, x):
        return np.interp(x, self.psi[:, 0], self.psi[:, 1], left=0.0, right=0.0)

    @property
    def t_support_end(self) -> float:
        nz = np.nonzero(self.phi[:, 1] > 0)[0]
        return float(self.phi[min(nz[-1] + 1, len(self.phi) - 1), 0]) if len(nz) else 0.0

    @property
    def x_support(self) -> tuple[float, float]:
        return float(self.psi[0, 0]), float(self.psi[-1, 0])

    def c1_norm(self) -> float:
        sp = np.abs(np.diff(self.psi[:, 1]) / np.diff(self.psi[:, 0]))
        st = np.abs(np.diff(self.phi[:, 1]) / np.diff(self.phi[:, 0]))
        mp, mt = self.psi[:, 1].max(), self.phi[:, 1].max()
        return float(mp * mt + mt * (sp.max() if len(sp) else 0) + mp * (st.max() if len(st) else 0))

    def _primitive(self, prof, x):
        xs, ys = prof[:, 0], prof[:, 1]
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, xs[0], xs[-1])
        k = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, len(xs) - 2)
        d = xc - xs[k]
        slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
        return cum[k] + ys[k] * d + 0.5 * slope * d * d

    def psi_cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        return np.diff(self._primitive(self.psi, edges))

    def phi_interval_integrals(self, times: np.ndarray) -> np.ndarray:
        # phi before its first node keeps its first value; t >= 0 only matters
        t = np.asarray(times, dtype=float)
        P = self._primitive(self.phi, t) + self.phi[0, 1] * np.minimum(t - self.phi[0, 0], 0.0)
        return np.diff(P)

    def to_dict(self) -> dict:
        return {"t_nodes": self.phi.tolist(), "x_nodes": self.psi.tolist()}


@dataclass
class ResidualReport:
    name: str
    value: float
    tolerance: float
    passed: bool | None
    witnesses: list = field(default_factory=list)
    series: list | None = None
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.passed)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "witnesses": self.witnesses,
        }
        if self.series is not None:
            d["series"] = self.series
        d.update(self.extra)
        return d


def _report(name, value, tol, **kw) -> ResidualReport:
    return ResidualReport(name, float(value), float(tol), bool(value >= -tol), **kw)


# -- quadrature core ------------------------------------------------------------------

def _edges(u: GridSolution) -> np.ndarray:
    return np.concatenate([u.x - 0.5 * u.dx, [u.x[-1] + 0.5 * u.dx]])


def _side_eval(fluxes: FluxPair, u: GridSolution, values: np.ndarray) -> np.ndarray:
    """f^l on cells left of 0, f^r on the rest; values has shape (times, cells)."""
    n_left = u.n_left
    out = np.empty_like(values)
    out[:, :n_left] = fluxes.left(values[:, :n_left])
    out[:, n_left:] = fluxes.right(values[:, n_left:])
    return out


def _check_bump(u: GridSolution, xi: TestBump):
    lo, hi = xi.x_support
    e = _edges(u)
    if lo < e[0] - 1e-12 or hi > e[-1] + 1e-12:
        raise ValidationError("test function support leaves the computational domain")
    if xi.t_support_end > u.times[-1] + 1e-12:
        raise ValidationError("test function support extends past the last recorded time")


def _integrate(u: GridSolution, xi: TestBump, density: np.ndarray, flux_density: np.ndarray,
               initial: np.ndarray, interface_density: np.ndarray | None = None) -> float:
    """I0 + sum_n [S1(t_n) (phi_{n+1}-phi_n) + S2(t_n) Phi_n] (+ interface term)."""
    e = _edges(u)
    Psi = xi.psi_cell_integrals(e)
    dPsi = xi.psi_at(e[1:]) - xi.psi_at(e[:-1])
    t = u.times
    phi = xi.phi_at(t)
    Phi = xi.phi_interval_integrals(t)
    S1 = density @ Psi
    S2 = flux_density @ dPsi
    val = float(initial @ Psi) * phi[0]
    val += float(np.sum(S1[:-1] * np.diff(phi)) + np.sum(S2[:-1] * Phi))
    if interface_density is not None:
        val += float(np.sum(interface_density[:-1] * Phi)) * float(xi.psi_at(0.0))
    return val


def _tolerance(u: GridSolution, xi: TestBump, density, flux_density, C: float) -> float:
    e = _edges(u)
    lo, hi = xi.x_support
    inside = (e[1:] > lo) & (e[:-1] < hi)
    t_len = max(xi.t_support_end, 0.0)
    scale = float(np.max(np.abs(density[:, inside]).sum(axis=1) + np.abs(flux_density[:, inside]).sum(axis=1))
                  ) * u.dx * t_len if inside.any() else 0.0
    dt = float(np.max(np.diff(u.times))) if len(u.times) > 1 else u.dt
    return C * (u.dx + dt) * xi.c1_norm() * scale


# -- residuals ----------------------------------------------------------------------

def kato_residual(u: GridSolution, v: GridSolution, xi: TestBump, fluxes: FluxPair,
                  C: float = KATO_C) -> ResidualReport:
    """Integral L1-dissipation inequality between two discrete solutions."""
    u.check_same_mesh(v)
    _check_bump(u, xi)
    a, b = u.field, v.field
    dens = np.abs(a - b)
    q = np.sign(a - b) * (_side_eval(fluxes, u, a) - _side_eval(fluxes, v, b))
    val = _integrate(u, xi, dens, q, dens[0])
    tol = _tolerance(u, xi, dens, q, C)
    return _report("kato", val, tol)


def _constant_field(u: GridSolution, cl: float, cr: float) -> np.ndarray:
    c = np.where(u.x < 0, cl, cr)
    return np.broadcast_to(c, u.field.shape)


def entropy_residual(u: GridSolution, g: GermSample, cl: float, cr: float, xi: TestBump,
                     fluxes: FluxPair | None = None, form: str = "general",
                     C: float = KATO_C) -> ResidualReport:
    """Entropy inequality against the constant pair (cl, cr) with the germ remainder.

    ``form="carrillo"`` admits only the reduced families: (cl, cr) in the
    germ with any test function, or cl = cr with a test function vanishing
    at x = 0; both have zero remainder.
    """
    fluxes = g.fluxes if fluxes is None else fluxes
    _check_bump(u, xi)
    dom = fluxes.domain
    if not (dom.contains(cl) and dom.contains(cr)):
        raise ValidationError(f"({cl}, {cr}) outside the state interval")
    if form == "general":
        R = remainder(g, cl, cr)
    elif form == "carrillo":
        in_g = (cl, cr) in g
        if not in_g and not (abs(cl - cr) <= STATE_TOL and xi.psi_at(0.0) == 0.0):
            raise ValidationError(
                "reduced form needs (cl, cr) in the germ, or cl = cr with xi vanishing at x = 0")
        R = 0.0
    else:
        raise ValidationError(f"unknown form {form!r}")
    c = _constant_field(u, cl, cr)
    dens = np.abs(u.field - c)
    q = np.sign(u.field - c) * (_side_eval(fluxes, u, u.field) - _side_eval(fluxes, u, np.asarray(c)))
    iface = np.full(len(u.times), R)
    val = _integrate(u, xi, dens, q, dens[0], iface)
    tol = _tolerance(u, xi, dens, q, C)
    return _report(f"entropy[{form}]", val, tol, extra={"cl": cl, "cr": cr, "remainder": R})


def krt_residual(u: GridSolution, fluxes: FluxPair, c: float, xi: TestBump,
                 tolerance: float | None = None, C: float = KATO_C) -> ResidualReport:
    """Entropy inequality with one constant c and remainder |f^r(c) - f^l(c)|."""
    _check_bump(u, xi)
    cf = _constant_field(u, c, c)
    dens = np.abs(u.field - cf)
    q = np.sign(u.field - cf) * (_side_eval(fluxes, u, u.field) - _side_eval(fluxes, u, np.asarray(cf)))
    R = abs(fluxes.right(c) - fluxes.left(c))
    val = _integrate(u, xi, dens, q, dens[0], np.full(len(u.times), R))
    tol = _tolerance(u, xi, dens, q, C) if tolerance is None else tolerance
    return _report("krt", val, tol, extra={"c": c})


def weak_residual(u: GridSolution, fluxes: FluxPair, xi: TestBump) -> float:
    """|int u0 xi(0) + iint (u xi_t + f(x,u) xi_x)|; vanishes for weak solutions."""
    _check_bump(u, xi)
    return abs(_integrate(u, xi, u.field, _side_eval(fluxes, u, u.field), u.field[0]))


def _l1(u: GridSolution, v: GridSolution) -> np.ndarray:
    return np.abs(u.field - v.field).sum(axis=1) * u.dx


def _same_generator(u: GridSolution, v: GridSolution) -> bool:
    keys = ("source", "eps", "num_flux")
    return all(u.meta.get(k) == v.meta.get(k) for k in keys)


def l1_contraction_report(u: GridSolution, v: GridSolution) -> ResidualReport:
    """||u - v||_1 over the recorded times; nonincreasing up to boundary fluxes."""
    u.check_same_mesh(v)
    d = _l1(u, v)
    tol = 1e-12 * u.n_cells
    budget = np.zeros(len(u.times))
    if len(u.boundary_flux) and len(v.boundary_flux):
        per = u.dt * np.abs(u.boundary_flux - v.boundary_flux).sum(axis=1)
        cum = np.concatenate([[0.0], np.cumsum(per)])
        idx = np.clip(np.round(u.times / u.dt).astype(int), 0, len(cum) - 1)
        budget = cum[idx]
    slack = d[0] + budget + tol - d
    increments = np.diff(d) - np.diff(budget)
    worst = float(max(slack.min(), -(increments.max() if len(increments) else 0.0) + tol))
    passed = bool(worst >= 0) if _same_generator(u, v) else None
    return ResidualReport("l1_contraction", worst, tol, passed,
                          series=d.tolist(), extra={"boundary_budget": float(budget[-1])})


def comparison_report(u: GridSolution, v: GridSolution, tol: float = 0.0) -> ResidualReport:
    """Order preservation when u0 <= v0, plus the positive-part contraction."""
    u.check_same_mesh(v)
    pos = np.maximum(u.field - v.field, 0.0)
    mass = pos.sum(axis=1) * u.dx
    ordered = bool(np.all(u.field[0] <= v.field[0]))
    wit = []
    if ordered:
        viol = float(pos.max())
        if viol > tol:
            n, j = np.unravel_index(int(np.argmax(pos)), pos.shape)
            wit.append({"t": float(u.times[n]), "x": float(u.x[j]), "excess": viol})
        value = -viol
    else:
        grow = float(np.max(np.diff(mass))) if len(mass) > 1 else 0.0
        value = -max(grow - 1e-12 * u.n_cells, 0.0)
    return ResidualReport("comparison", value, tol, bool(value >= -tol), wit,
                          series=mass.tolist(), extra={"ordered_data": ordered})


def max_principle_report(u: GridSolution, envelope) -> ResidualReport:
    env_l, env_r = (Interval(*e) if not isinstance(e, Interval) else e for e in envelope)
    n_left = u.n_left
    L, R = u.field[:, :n_left], u.field[:, n_left:]
    exc = max(
        float(np.max(env_l.lo - L)) if L.size else -np.inf,
        float(np.max(L - env_l.hi)) if L.size else -np.inf,
        float(np.max(env_r.lo - R)) if R.size else -np.inf,
        float(np.max(R - env_r.hi)) if R.size else -np.inf,
    )
    value = -max(exc, 0.0)
    return ResidualReport("max_principle", value, 0.0, bool(value >= 0.0),
                          extra={"max_excursion": exc})


def _window_means(a: np.ndarray, w: int) -> np.ndarray:
    n = len(a) // w
    if n == 0:
        return a[None].mean(axis=1) if len(a) else a
    return a[: n * w].reshape(n, w).mean(axis=1)


def trace_membership(u: GridSolution, g: GermSample, window: int = 10, resolution: int | None = None,
                     tol: float | None = None) -> ResidualReport:
    """Distance of windowed interface traces to the dual of ``g`` in U x U."""
    res = resolution or max(g.resolution or 0, 101)
    d = dual(g, res)
    gl = _window_means(u.trace_left, window)
    gr = _window_means(u.trace_right, window)
    P = d.pairs_array
    dist = np.sqrt((gl[:, None] - P[None, :, 0]) ** 2 + (gr[:, None] - P[None, :, 1]) ** 2).min(axis=1)
    if tol is None:
        # sample spacing along the dual plus a few cells of smearing
        span = g.fluxes.domain.length
        tol = 2.0 * span / res + 10.0 * u.dx
    med = float(np.median(dist))
    return ResidualReport("trace_membership", tol - med, tol, bool(med <= tol),
                          series=dist.tolist(), extra={"median": med, "window": window})


def interface_dissipation(u: GridSolution, g: GermSample, germ=None, steps: Iterable[int] | None = None
                          ) -> ResidualReport:
    """Per-step min over g of q^l(gamma^l, c^l) - q^r(gamma^r, c^r).

    The traces are those of the interface Riemann solution between the two
    cells adjacent to x = 0.
    """
    germ = g.spec if germ is None else germ
    if germ is None:
        germ = g
    solver = germ.maximal() if isinstance(germ, GermSpec) else germ
    fl, fr = g.fluxes.left, g.fluxes.right
    P = g.pairs_array
    idx = range(len(u.trace_left)) if steps is None else steps
    worst, wit = np.inf, []
    for n in idx:
        sol = solve_interface(solver, g.fluxes, float(u.trace_left[n]), float(u.trace_right[n]))
        D = fl.entropy_flux(sol.ul, P[:, 0]) - fr.entropy_flux(sol.ur, P[:, 1])
        m = float(D.min())
        if m < worst:
            worst, wit = m, [{"step": int(n), "traces": [sol.ul, sol.ur],
                              "pair": P[int(np.argmin(D))].tolist()}]
    tol = 10 * g.rh_tol
    return _report("interface_dissipation", worst, tol, witnesses=wit)


def continuous_dependence_report(u: GridSolution, v: GridSolution, g1: GermSample, g2: GermSample,
                                 budget: float = 0.02) -> ResidualReport:
    u.check_same_mesh(v)
    rho = germ_distance(g1, g2)
    d = _l1(u, v)
    bound = d[0] + u.times * rho + budget
    slack = bound - d
    return ResidualReport("continuous_dependence", float(slack.min()), 0.0, bool(slack.min() >= 0),
                          series=d.tolist(), extra={"rho": rho, "budget": budget})


# -- (B1)-(B5) battery ----------------------------------------------------------------

def _trend(values: Sequence[float], rel: float = 0.05, floor: float = 1e-9) -> bool:
    v = np.asarray(values, dtype=float)
    slack = floor + rel * (np.max(np.abs(v)) if len(v) else 0.0)
    return bool(np.all(np.diff(v) <= slack)) and bool(v[-1] <= v[0] + floor)


def convergence_battery(make_run: Callable, params: Sequence[float], fluxes: FluxPair,
                        u0, elementary, elementary_data, bumps: Sequence[TestBump],
                        constants: Sequence[float], bound: tuple[float, float]) -> list[ResidualReport]:
    """Trend checks over a family of approximate solvers S^p indexed by ``params``.

    ``make_run(p, data)`` returns a GridSolution; ``elementary`` is the exact
    stationary solution as a callable x -> u and ``elementary_data`` the
    matching initial datum.  Parameters should be ordered from coarse to fine.
    """
    runs = [make_run(p, u0) for p in params]
    elem = [make_run(p, elementary_data) for p in params]
    lo, hi = bound
    b1 = [max(float(r.field.max()) - hi, lo - float(r.field.min()), 0.0) for r in runs]
    b2 = [float(np.abs(r.field[-1] - elementary(r.x)).sum() * r.dx) for r in elem]
    b3, b4, b5 = [], [], []
    for r, e in zip(runs, elem):
        b3.append(max(max(0.0, -kato_residual(r, e, xi, fluxes, C=0.0).value) for xi in bumps))
        b4.append(max(weak_residual(r, fluxes, xi) for xi in bumps))
        off = [xi for xi in bumps if xi.psi_at(0.0) == 0.0]
        b5.append(max((max(0.0, -krt_residual(r, fluxes, c, xi, tolerance=0.0).value)
                       for xi in off for c in constants), default=0.0))
    reports = [ResidualReport("B1", -max(b1), 1e-10, bool(max(b1) <= 1e-10), series=b1)]
    for name, series in (("B2", b2), ("B3", b3), ("B4", b4), ("B5", b5)):
        ok = _trend(series)
        reports.append(ResidualReport(name, -float(series[-1]), 0.0, ok, series=series,
                                      extra={"params": list(params)}))
    return reports
