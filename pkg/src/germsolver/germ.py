"""Admissibility germs: catalog predicates, finite samples and germ algebra.

A germ is handled in two forms.  ``GermSpec`` is a membership predicate
with closed-form tests on piecewise-linear fluxes.  ``GermSample`` is a
finite set of Rankine-Hugoniot pairs; duals, closures, L1-dissipativity
and completeness act on samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptyRange, FluxMismatch, FluxShapeMismatch, RHViolation, ValidationError
from .flux import LEVEL_TOL, FluxPair, PiecewiseLinearFlux
from . import riemann

RH_TOL = 1e-9
STATE_TOL = 1e-9
SNAP_TOL = 1e-4

KINDS = (
    "VolpertKruzhkov",
    "Gelfand",
    "RankineHugoniot",
    "Connection",
    "AudussePerthame",
    "ConnectionAPDual",
    "ABDual",
    "KRT",
    "VVOpen",
    "VV",
    "Explicit",
    "Dual",
)

_ALIASES = {k.lower(): k for k in KINDS}
_ALIASES.update({
    "vkr": "VolpertKruzhkov",
    "kruzhkov": "VolpertKruzhkov",
    "rh": "RankineHugoniot",
    "ap": "AudussePerthame",
    "ab": "ABDual",
    "abdual": "ABDual",
    "apdual": "ConnectionAPDual",
    "vvo": "VVOpen",
    "vv_open": "VVOpen",
    "vvopen": "VVOpen",
})

__all__ = [
    "StatePair",
    "GermSpec",
    "GermSample",
    "L1DResult",
    "ProbeResult",
    "CoverageReport",
    "contains",
    "sample",
    "is_l1d",
    "dual",
    "closure",
    "definiteness_probe",
    "completeness_check",
    "remainder",
    "germ_distance",
    "crossing_condition",
    "is_bell",
    "is_valley",
    "germ_from_literal",
    "RH_TOL",
]


class StatePair(NamedTuple):
    ul: float
    ur: float

    @classmethod
    def of(cls, p) -> "StatePair":
        return cls(float(p[0]), float(p[1]))


def _sgn(z):
    return np.sign(z)


# -- flux shape helpers -------------------------------------------------------

def _unimodal(f: PiecewiseLinearFlux, peak: bool, tol: float = LEVEL_TOL) -> bool:
    d = np.diff(f.f)
    if not peak:
        d = -d
    # nondecreasing then nonincreasing
    seen_down = False
    for v in d:
        if v < -tol:
            seen_down = True
        elif v > tol and seen_down:
            return False
    return True


def _extremum(f: PiecewiseLinearFlux, peak: bool) -> float:
    vals = f.f if peak else -f.f
    k = int(np.argmax(vals))
    return float(f.u[k])


def is_valley(f: PiecewiseLinearFlux) -> bool:
    return _unimodal(f, peak=False)


def is_bell(fluxes: FluxPair, tol: float = 1e-9) -> bool:
    """Bell configuration: vanishing at both ends, unimodal, one admissible crossing."""
    for f in (fluxes.left, fluxes.right):
        if abs(f.f[0]) > tol or abs(f.f[-1]) > tol or f.f.min() < -tol:
            return False
        if not _unimodal(f, peak=True):
            return False
    lo, hi = fluxes.domain.lo, fluxes.domain.hi
    inner = [x for x in fluxes.crossings if lo + tol < x < hi - tol]
    if len(inner) > 1:
        return False
    if inner:
        a = _extremum(fluxes.left, True)
        b = _extremum(fluxes.right, True)
        if not min(a, b) - tol <= inner[0] <= max(a, b) + tol:
            return False
    return True


def crossing_condition(fluxes: FluxPair, tol: float = LEVEL_TOL) -> tuple[bool, float | None]:
    """Return (holds, u_chi) for sign(z - u_chi)(f^r - f^l)(z) >= 0 for all z."""
    b = fluxes.breakpoints
    d = fluxes.right(b) - fluxes.left(b)
    neg = np.nonzero(d < -tol)[0]
    pos = np.nonzero(d > tol)[0]
    if not len(neg):
        return True, float(b[0])
    if not len(pos):
        return True, float(b[-1])
    if neg.max() < pos.min():
        # any point between the last negative and first positive breakpoint
        i, j = neg.max(), pos.min()
        zeros = [float(b[k]) for k in range(i + 1, j)]
        if zeros:
            return True, zeros[0]
        d0, d1 = d[i], d[j]
        return True, float(b[i] + d0 / (d0 - d1) * (b[j] - b[i]))
    return False, None


# -- germ predicate -------------------------------------------------------------

class GermSpec:
    """A catalog germ as a membership predicate."""

    def __init__(self, kind: str, fluxes: FluxPair, params: dict | None = None,
                 rh_tol: float = RH_TOL, snap: bool = True):
        canon = _ALIASES.get(str(kind).lower())
        if canon is None:
            raise ValidationError(f"unknown germ kind {kind!r}; expected one of {list(KINDS)}")
        if rh_tol <= 0:
            raise ValidationError("rh_tol must be positive")
        self.kind = canon
        self.fluxes = fluxes
        self.rh_tol = float(rh_tol)
        self.params = dict(params or {})
        self._validate(snap)

    # -- construction checks --------------------------------------------------
    def _validate(self, snap: bool):
        fl, fr = self.fluxes.left, self.fluxes.right
        k = self.kind
        if k in ("VolpertKruzhkov", "Gelfand") and not self.fluxes.same:
            raise FluxShapeMismatch(f"{k} germ needs identical left and right fluxes")
        if k in ("AudussePerthame", "ConnectionAPDual"):
            if not (is_valley(fl) and is_valley(fr)):
                raise FluxShapeMismatch(f"{k} germ needs valley-shaped fluxes")
        if k == "ABDual" and not is_bell(self.fluxes):
            raise FluxShapeMismatch("ABDual germ needs bell-shaped fluxes")
        if k in ("Connection", "ConnectionAPDual", "ABDual"):
            try:
                A = float(self.params["A"])
                B = float(self.params["B"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{k} germ needs numeric params A and B") from exc
            if not (self.fluxes.domain.contains(A) and self.fluxes.domain.contains(B)):
                raise ValidationError(f"connection ({A}, {B}) outside the state interval")
            sA, sB = fl(A), fr(B)
            if abs(sA - sB) > self.rh_tol:
                pts = fr.level_points(sA)
                near = min(pts, key=lambda p: abs(p - B)) if pts else None
                if snap and near is not None and abs(near - B) <= SNAP_TOL:
                    self.params["B_given"] = B
                    B = float(near)
                else:
                    raise RHViolation(
                        f"connection ({A}, {B}) violates Rankine-Hugoniot: {sA} vs {sB}")
            self.params["A"], self.params["B"] = A, B
            if k == "ABDual":
                uo_l = _extremum(fl, True)
                uo_r = _extremum(fr, True)
                if A < uo_l - STATE_TOL or B > uo_r + STATE_TOL:
                    raise FluxShapeMismatch(
                        f"bell connection needs A >= {uo_l} and B <= {uo_r}")
            if k == "ConnectionAPDual":
                uo_l = _extremum(fl, False)
                uo_r = _extremum(fr, False)
                if A > uo_l + STATE_TOL or B < uo_r - STATE_TOL:
                    raise FluxShapeMismatch(
                        f"valley connection needs A <= {uo_l} and B >= {uo_r}")
        if k in ("Explicit", "Dual"):
            pairs = np.asarray(self.params.get("pairs", []), dtype=float).reshape(-1, 2)
            if not len(pairs):
                raise ValidationError(f"{k} germ needs a nonempty pair list")
            for a, b in pairs:
                if not (self.fluxes.domain.contains(a) and self.fluxes.domain.contains(b)):
                    raise ValidationError(f"pair ({a}, {b}) outside the state interval")
            bad = np.abs(fl(pairs[:, 0]) - fr(pairs[:, 1])) > self.rh_tol
            if k == "Explicit" and bad.any():
                a, b = pairs[np.argmax(bad)]
                raise RHViolation(f"pair ({a}, {b}) violates Rankine-Hugoniot")
            self.params["pairs"] = pairs

    @classmethod
    def connection(cls, fluxes: FluxPair, A: float, B: float | None = None,
                   kind: str = "Connection", rh_tol: float = RH_TOL) -> "GermSpec":
        """Connection germ; ``B`` defaults to the root of f^r = f^l(A) on the
        branch prescribed by the flux shape."""
        if B is None:
            s = fluxes.left(A)
            pts = fluxes.right.level_points(s)
            if not pts:
                raise RHViolation(f"no right state at level {s}")
            if is_bell(fluxes):
                B = min(pts)
            else:
                B = max(pts)
        return cls(kind, fluxes, {"A": A, "B": B}, rh_tol)

    @property
    def A(self) -> float:
        return self.params["A"]

    @property
    def B(self) -> float:
        return self.params["B"]

    @property
    def connection_level(self) -> float:
        return float(self.fluxes.left(self.params["A"]))

    @property
    def enumerable(self) -> bool:
        return self.kind != "Explicit"

    def __repr__(self):
        p = {k: v for k, v in self.params.items() if k != "pairs"}
        return f"GermSpec({self.kind}, {p})"

    def to_literal(self) -> dict:
        if self.kind == "Explicit":
            return {"pairs": self.params["pairs"].tolist()}
        params = {k: v for k, v in self.params.items() if k in ("A", "B")}
        if self.kind == "Dual":
            params = {"pairs": self.params["pairs"].tolist()}
        return {"kind": self.kind, "params": params}

    def maximal(self) -> "GermSpec":
        """Unique maximal L1D extension used for solving, when known in closed form."""
        if self.kind == "Connection":
            if is_bell(self.fluxes):
                return GermSpec("ABDual", self.fluxes, {"A": self.A, "B": self.B}, self.rh_tol)
            fl, fr = self.fluxes.left, self.fluxes.right
            if is_valley(fl) and is_valley(fr):
                return GermSpec("ConnectionAPDual", self.fluxes, {"A": self.A, "B": self.B},
                                self.rh_tol)
            return GermSpec("Dual", self.fluxes, {"pairs": [[self.A, self.B]]}, self.rh_tol)
        if self.kind == "Explicit":
            return GermSpec("Dual", self.fluxes, {"pairs": self.params["pairs"]}, self.rh_tol)
        return self

    # -- membership -------------------------------------------------------------
    def contains(self, p) -> bool:
        ul, ur = float(p[0]), float(p[1])
        dom = self.fluxes.domain
        if not (dom.contains(ul) and dom.contains(ur)):
            return False
        return bool(self.contains_many(np.array([ul]), np.array([ur]))[0])

    def contains_many(self, ul, ur) -> np.ndarray:
        ul = np.asarray(ul, dtype=float)
        ur = np.asarray(ur, dtype=float)
        fl, fr = self.fluxes.left, self.fluxes.right
        sl, sr = fl(ul), fr(ur)
        rh = np.abs(sl - sr) <= self.rh_tol
        k = self.kind
        if k == "RankineHugoniot":
            return rh
        if k == "VolpertKruzhkov":
            return rh & (np.abs(ul - ur) <= STATE_TOL)
        if k == "Connection":
            return rh & (np.abs(ul - self.A) <= STATE_TOL) & (np.abs(ur - self.B) <= STATE_TOL)
        if k == "Explicit":
            P = self.params["pairs"]
            hit = (np.abs(ul[:, None] - P[None, :, 0]) <= STATE_TOL) & (
                np.abs(ur[:, None] - P[None, :, 1]) <= STATE_TOL)
            return rh & hit.any(axis=1)
        if k == "AudussePerthame":
            ol = _extremum(fl, False)
            orr = _extremum(fr, False)
            return rh & (_sgn(ul - ol) == _sgn(ur - orr))
        if k == "ConnectionAPDual":
            s_ab = self.connection_level
            bad = (ul < self.A - STATE_TOL) & (ur > self.B + STATE_TOL)
            return rh & (sl >= s_ab - self.rh_tol) & ~bad
        if k == "ABDual":
            s_ab = self.connection_level
            bad = (ul > self.A + STATE_TOL) & (ur < self.B - STATE_TOL)
            return rh & (sl <= s_ab + self.rh_tol) & ~bad
        if k == "Dual":
            P = self.params["pairs"]
            ql = fl.entropy_flux(P[None, :, 0], ul[:, None])
            qr = fr.entropy_flux(P[None, :, 1], ur[:, None])
            return rh & np.all(ql - qr >= -self.rh_tol, axis=1)
        out = np.zeros(ul.shape, dtype=bool)
        test = {
            "Gelfand": self._gelfand,
            "KRT": self._krt,
            "VVOpen": self._vv_open,
            "VV": self._vv,
        }[k]
        for i in np.nonzero(rh)[0]:
            out[i] = test(float(ul[i]), float(ur[i]), float(sl[i]))
        return out

    def _gelfand(self, ul: float, ur: float, s: float) -> bool:
        if abs(ul - ur) <= STATE_TOL:
            return True
        f = self.fluxes.left
        rel = ">" if ur > ul else "<"
        return f.holds_on(ul, ur, s, rel, include_a=False, include_b=False)

    def _pointwise(self, a: float, b: float, s: float, use_max: bool) -> bool:
        bp = self.fluxes.breakpoints
        inner = bp[(bp > a) & (bp < b)]
        pts = np.concatenate([[a], inner, [b]])
        vl, vr = self.fluxes.left(pts), self.fluxes.right(pts)
        if use_max:
            return bool(np.all(np.maximum(vl, vr) >= s - LEVEL_TOL))
        return bool(np.all(np.minimum(vl, vr) <= s + LEVEL_TOL))

    def _krt(self, ul: float, ur: float, s: float) -> bool:
        if abs(ul - ur) <= STATE_TOL:
            return True
        if ul < ur:
            return self._pointwise(ul, ur, s, use_max=True)
        return self._pointwise(ur, ul, s, use_max=False)

    def _vv_open(self, ul: float, ur: float, s: float) -> bool:
        if abs(ul - ur) <= STATE_TOL:
            return True
        fl, fr = self.fluxes.left, self.fluxes.right
        if ul < ur:
            return (fl.holds_on(ul, ur, s, ">", include_a=False, include_b=True)
                    or fr.holds_on(ul, ur, s, ">", include_a=True, include_b=False))
        return (fl.holds_on(ur, ul, s, "<", include_a=True, include_b=False)
                or fr.holds_on(ur, ul, s, "<", include_a=False, include_b=True))

    def _vv(self, ul: float, ur: float, s: float) -> bool:
        if abs(ul - ur) <= STATE_TOL:
            return True
        fl, fr = self.fluxes.left, self.fluxes.right
        if ul < ur:
            zl = fl.extent(ul, ur, s, ">=")
            zr = fr.extent(ur, ul, s, ">=")
            return zl >= zr - STATE_TOL
        zr = fr.extent(ur, ul, s, "<=")
        zl = fl.extent(ul, ur, s, "<=")
        return zr >= zl - STATE_TOL

    # -- level enumeration --------------------------------------------------------
    @cached_property
    def common_range(self) -> tuple[float, float]:
        rl, rr = self.fluxes.left.range, self.fluxes.right.range
        return max(rl.lo, rr.lo), min(rl.hi, rr.hi)

    def special_levels(self) -> list[float]:
        out = []
        if self.kind in ("Connection", "ConnectionAPDual", "ABDual"):
            out.append(self.connection_level)
        if self.kind in ("Explicit", "Dual"):
            out.extend(self.fluxes.left(self.params["pairs"][:, 0]).tolist())
        return out

    @cached_property
    def _base_table(self):
        fl, fr = self.fluxes.left, self.fluxes.right
        lo, hi = self.common_range
        raw = np.concatenate([
            fl.f, fr.f,
            fl(np.asarray(self.fluxes.crossings, dtype=float)) if self.fluxes.crossings else [],
            self.special_levels(),
        ])
        raw = raw[(raw >= lo - self.rh_tol) & (raw <= hi + self.rh_tol)]
        levels = _unique_tol(np.sort(raw), LEVEL_TOL)
        lpts = [np.asarray(fl.level_points(s)) for s in levels]
        rpts = [np.asarray(fr.level_points(s)) for s in levels]
        return levels, lpts, rpts

    def level_table(self, extra_levels: Sequence[float] = (), extra_left: Sequence[float] = (),
                    extra_right: Sequence[float] = ()):
        """Candidate levels with their left and right preimage points.

        ``extra_levels`` are merged in; ``extra_left``/``extra_right`` states
        are attached to the level they sit on.
        """
        levels, lpts, rpts = self._base_table
        if not len(extra_levels) and not len(extra_left) and not len(extra_right):
            return levels, lpts, rpts
        levels = levels.copy()
        lpts = list(lpts)
        rpts = list(rpts)
        fl, fr = self.fluxes.left, self.fluxes.right
        for s in extra_levels:
            i = int(np.searchsorted(levels, s))
            near = [j for j in (i - 1, i) if 0 <= j < len(levels) and abs(levels[j] - s) <= LEVEL_TOL]
            if near:
                continue
            levels = np.insert(levels, i, s)
            lpts.insert(i, np.asarray(fl.level_points(s)))
            rpts.insert(i, np.asarray(fr.level_points(s)))
        for states, side_f, pts in ((extra_left, fl, lpts), (extra_right, fr, rpts)):
            for u in states:
                s = side_f(u)
                i = int(np.searchsorted(levels, s - LEVEL_TOL))
                if i < len(levels) and abs(levels[i] - s) <= LEVEL_TOL:
                    pts[i] = np.append(pts[i], u)
        return levels, lpts, rpts


def _unique_tol(x: np.ndarray, tol: float) -> np.ndarray:
    if not len(x):
        return x
    keep = np.concatenate([[True], np.diff(x) > tol])
    return x[keep]


# -- germ samples -------------------------------------------------------------------

class GermSample:
    """Finite set of Rankine-Hugoniot pairs."""

    def __init__(self, pairs, fluxes: FluxPair, resolution: int | None = None,
                 spec: GermSpec | None = None, rh_tol: float = RH_TOL):
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        if len(arr):
            arr = _dedupe_pairs(arr)
        self.pairs_array = arr
        self.pairs_array.setflags(write=False)
        self.fluxes = fluxes
        self.resolution = resolution
        self.spec = spec
        self.rh_tol = float(rh_tol)
        if len(arr):
            err = np.abs(fluxes.left(arr[:, 0]) - fluxes.right(arr[:, 1]))
            if err.max() > rh_tol:
                k = int(np.argmax(err))
                raise RHViolation(f"pair {tuple(arr[k])} violates Rankine-Hugoniot by {err[k]:.3g}")

    @property
    def pairs(self) -> list[StatePair]:
        return [StatePair(a, b) for a, b in self.pairs_array.tolist()]

    @property
    def ul(self) -> np.ndarray:
        return self.pairs_array[:, 0]

    @property
    def ur(self) -> np.ndarray:
        return self.pairs_array[:, 1]

    @property
    def levels(self) -> np.ndarray:
        return self.fluxes.left(self.ul)

    def __len__(self):
        return len(self.pairs_array)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, p) -> bool:
        if not len(self):
            return False
        d = np.abs(self.pairs_array - np.asarray(p, dtype=float)[None, :]).max(axis=1)
        return bool(d.min() <= STATE_TOL)

    def __repr__(self):
        return f"GermSample({len(self)} pairs, resolution={self.resolution}, spec={self.spec!r})"

    def rows(self) -> list[tuple[float, float, float]]:
        return [(a, b, s) for (a, b), s in zip(self.pairs_array.tolist(), self.levels.tolist())]

    def as_spec(self) -> GermSpec:
        return GermSpec("Explicit", self.fluxes, {"pairs": self.pairs_array}, self.rh_tol)


def _dedupe_pairs(arr: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    arr = arr[order]
    keep = [0]
    for i in range(1, len(arr)):
        if np.max(np.abs(arr[i] - arr[keep[-1]])) > tol:
            keep.append(i)
    return arr[keep]


def contains(spec: GermSpec, p) -> bool:
    return spec.contains(p)


def _rh_candidates(fluxes: FluxPair, levels: Iterable[float]) -> np.ndarray:
    fl, fr = fluxes.left, fluxes.right
    out = []
    for s in levels:
        lp = fl.level_points(s)
        rp = fr.level_points(s)
        for a in lp:
            for b in rp:
                out.append((a, b))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def _level_grid(fluxes: FluxPair, resolution: int, extra: Iterable[float] = ()) -> np.ndarray:
    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    rl, rr = fluxes.left.range, fluxes.right.range
    lo, hi = max(rl.lo, rr.lo), min(rl.hi, rr.hi)
    if lo > hi + RH_TOL:
        raise EmptyRange(
            f"flux ranges [{rl.lo}, {rl.hi}] and [{rr.lo}, {rr.hi}] are disjoint")
    hi = max(hi, lo)
    grid = np.linspace(lo, hi, int(resolution))
    ex = np.asarray([e for e in extra if lo - RH_TOL <= e <= hi + RH_TOL], dtype=float)
    return _unique_tol(np.sort(np.concatenate([grid, ex])), LEVEL_TOL)


def sample(spec: GermSpec, resolution: int) -> GermSample:
    """Finite sample of a catalog germ on ``resolution`` flux levels."""
    fluxes = spec.fluxes
    if spec.kind == "Explicit":
        if resolution < 2:
            raise ValidationError("resolution must be at least 2")
        return GermSample(spec.params["pairs"], fluxes, resolution, spec, spec.rh_tol)
    levels = _level_grid(fluxes, resolution, spec.special_levels())
    cand = _rh_candidates(fluxes, levels)
    keep = spec.contains_many(cand[:, 0], cand[:, 1]) if len(cand) else np.zeros(0, bool)
    return GermSample(cand[keep], fluxes, resolution, spec, spec.rh_tol)


class L1DResult(NamedTuple):
    ok: bool
    witness: tuple | None
    margin: float

    def __bool__(self):
        return self.ok


def _l1d_defect(a: np.ndarray, b: np.ndarray, fluxes: FluxPair) -> np.ndarray:
    """D[i, j] = q^l(a_i.ul, b_j.ul) - q^r(a_i.ur, b_j.ur)."""
    ql = fluxes.left.entropy_flux(a[:, None, 0], b[None, :, 0])
    qr = fluxes.right.entropy_flux(a[:, None, 1], b[None, :, 1])
    return ql - qr


def is_l1d(s: GermSample, tol: float | None = None) -> L1DResult:
    """Pairwise check q^l(p.ul, q.ul) >= q^r(p.ur, q.ur); returns the worst witness."""
    if not len(s):
        raise ValidationError("empty germ sample")
    tol = s.rh_tol if tol is None else tol
    P = s.pairs_array
    D = _l1d_defect(P, P, s.fluxes)
    k = int(np.argmin(D))
    i, j = divmod(k, D.shape[1])
    worst = float(D[i, j])
    if worst >= -tol:
        return L1DResult(True, None, worst)
    return L1DResult(False, (StatePair.of(P[i]), StatePair.of(P[j])), worst)


def dual(g: GermSample, resolution: int, tol: float | None = None) -> GermSample:
    """RH pairs satisfying the L1D inequality against every pair of ``g``."""
    if not len(g):
        raise ValidationError("empty germ sample")
    tol = g.rh_tol if tol is None else tol
    levels = _level_grid(g.fluxes, resolution, g.levels.tolist())
    cand = _rh_candidates(g.fluxes, levels)
    if len(g):
        cand = np.concatenate([cand, g.pairs_array])
    D = _l1d_defect(g.pairs_array, cand, g.fluxes)
    keep = np.all(D >= -tol, axis=0)
    spec = GermSpec("Dual", g.fluxes, {"pairs": g.pairs_array}, g.rh_tol)
    return GermSample(cand[keep], g.fluxes, resolution, spec, g.rh_tol)


def closure(g: GermSample) -> GermSample:
    """Adjoin left and right contact shocks to every pair of ``g``."""
    fl, fr = g.fluxes.left, g.fluxes.right
    out = [g.pairs_array]
    for ul, ur in g.pairs_array.tolist():
        dl = riemann.theta_domain(fl, "left", ul)[0]
        dr = riemann.theta_domain(fr, "right", ur)[0]
        lefts = [u for u in fl.level_points(fl(ul)) if dl.contains(u)] + [ul]
        rights = [u for u in fr.level_points(fr(ur)) if dr.contains(u)] + [ur]
        out.append(np.asarray([(a, b) for a in lefts for b in rights], dtype=float))
    return GermSample(np.concatenate(out), g.fluxes, g.resolution, g.spec, g.rh_tol)


class ProbeResult(NamedTuple):
    verdict: str
    witness: tuple | None
    margin: float
    resolution: int

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": [list(p) for p in self.witness] if self.witness else None,
            "margin": self.margin,
            "resolution": self.resolution,
        }


def _robust_violation(P: np.ndarray, Q: np.ndarray, fluxes: FluxPair, margin: float):
    dom = fluxes.domain
    D = _l1d_defect(P, Q, fluxes)

    def interior(arr):
        return np.all((arr > dom.lo + STATE_TOL) & (arr < dom.hi - STATE_TOL), axis=1)

    mask = (D < -margin) & interior(P)[:, None] & interior(Q)[None, :]
    if not mask.any():
        return None, float(D.min()) if D.size else 0.0
    Dm = np.where(mask, D, np.inf)
    k = int(np.argmin(Dm))
    i, j = divmod(k, D.shape[1])
    return (StatePair.of(P[i]), StatePair.of(Q[j])), float(D[i, j])


def definiteness_probe(spec: GermSpec, resolution: int) -> ProbeResult:
    """Sufficient test for definiteness: the sampled dual is L1D."""
    g = sample(spec, resolution)
    if not len(g):
        return ProbeResult("inconclusive", None, 0.0, resolution)
    margin = 10 * spec.rh_tol
    P = g.pairs_array
    w, m = _robust_violation(P, P, g.fluxes, margin)
    if w is not None:
        return ProbeResult("not-definite", w, m, resolution)
    d = dual(g, resolution)
    res = is_l1d(d)
    if res.ok:
        return ProbeResult("definite-at-resolution", None, res.margin, resolution)
    D = d.pairs_array
    w, m = _robust_violation(D, D, g.fluxes, margin)
    if w is not None:
        return ProbeResult("not-definite", w, m, resolution)
    return ProbeResult("inconclusive", res.witness, res.margin, resolution)


@dataclass
class CoverageReport:
    coverage: float
    uncovered: list = field(default_factory=list)
    grid_size: int = 0
    resolution: int = 0

    def to_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "uncovered": [list(p) for p in self.uncovered],
            "grid_size": self.grid_size,
            "resolution": self.resolution,
        }


def completeness_check(g: GermSample, resolution: int, max_witnesses: int = 10) -> CoverageReport:
    """Fraction of a U×U grid resolved by one-sided fans into pairs of ``g``.

    Pairs of the sample are tested directly; if the sample remembers its
    predicate, uncovered data are retried with the predicate refined at the
    data levels.
    """
    if not len(g):
        raise ValidationError("empty germ sample")
    fl, fr = g.fluxes.left, g.fluxes.right
    dom = g.fluxes.domain
    grid = np.linspace(dom.lo, dom.hi, int(resolution))
    L = np.zeros((len(grid), len(g)), dtype=bool)
    R = np.zeros((len(grid), len(g)), dtype=bool)
    for k, (ul, ur) in enumerate(g.pairs_array.tolist()):
        il = riemann.theta_domain(fl, "left", ul)[0]
        ir = riemann.theta_domain(fr, "right", ur)[0]
        L[:, k] = (grid >= il.lo - STATE_TOL) & (grid <= il.hi + STATE_TOL)
        R[:, k] = (grid >= ir.lo - STATE_TOL) & (grid <= ir.hi + STATE_TOL)
    covered = (L.astype(np.int32) @ R.T.astype(np.int32)) > 0
    if g.spec is not None and g.spec.enumerable and not covered.all():
        for i, j in zip(*np.nonzero(~covered)):
            a, _ = riemann.interface_candidates(g.spec, g.fluxes, grid[i], grid[j])
            covered[i, j] = len(a) > 0
    miss = np.argwhere(~covered)
    wit = [StatePair(float(grid[i]), float(grid[j])) for i, j in miss[:max_witnesses]]
    return CoverageReport(float(covered.mean()), wit, covered.size, int(resolution))


def remainder(g: GermSample, cl: float, cr: float) -> float:
    """R_G(cl, cr) = 2 min over pairs of osc(f^l; cl, b^l) + osc(f^r; cr, b^r)."""
    if not len(g):
        raise ValidationError("empty germ sample")
    fl, fr = g.fluxes.left, g.fluxes.right
    best = min(fl.osc(cl, a) + fr.osc(cr, b) for a, b in g.pairs_array.tolist())
    return 2.0 * best


def germ_distance(g1: GermSample, g2: GermSample) -> float:
    if g1.fluxes != g2.fluxes:
        raise FluxMismatch("germ samples are built on different flux pairs")
    if not len(g1) or not len(g2):
        raise ValidationError("empty germ sample")
    D = _l1d_defect(g1.pairs_array, g2.pairs_array, g1.fluxes)
    return float(max(0.0, -D.min()))


def germ_from_literal(obj, fluxes: FluxPair, rh_tol: float = RH_TOL) -> GermSpec:
    """``{"kind": ..., "params": {...}}`` or ``{"pairs": [[ul, ur], ...]}``."""
    if not isinstance(obj, dict):
        raise ValidationError(f"germ literal must be an object, got {obj!r}")
    if "pairs" in obj and "kind" not in obj:
        extra = set(obj) - {"pairs"}
        if extra:
            raise ValidationError(f"unknown germ keys {sorted(extra)}")
        return GermSpec("Explicit", fluxes, {"pairs": obj["pairs"]}, rh_tol)
    extra = set(obj) - {"kind", "params"}
    if extra:
        raise ValidationError(f"unknown germ keys {sorted(extra)}")
    if "kind" not in obj:
        raise ValidationError("germ literal needs 'kind' or 'pairs'")
    params = obj.get("params") or {}
    if not isinstance(params, dict):
        raise ValidationError("germ params must be an object")
    allowed = {"A", "B", "pairs"}
    bad = set(params) - allowed
    if bad:
        raise ValidationError(f"unknown germ params {sorted(bad)}")
    return GermSpec(obj["kind"], fluxes, params, rh_tol)
