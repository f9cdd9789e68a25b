"""Piecewise-linear fluxes and the discontinuous composite flux.

Every flux is a continuous piecewise-linear function given by its
breakpoints.  Minima, maxima, oscillations, Godunov fluxes and level sets
are then finite node scans, so all queries below are exact up to
floating-point rounding.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FluxMismatch, OutOfDomain, ValidationError

STATE_TOL = 1e-12
LEVEL_TOL = 1e-12

__all__ = [
    "Interval",
    "PiecewiseLinearFlux",
    "FluxPair",
    "evaluate",
    "osc",
    "singular_map",
    "entropy_flux",
    "godunov_flux",
    "lipschitz_bound",
    "level_set",
    "sampled",
    "burgers",
    "tent",
    "bell",
    "from_generator",
    "flux_from_literal",
    "sign",
]


def sign(z: float) -> float:
    """Sign with sign(0) = 0."""
    return 1.0 if z > 0 else (-1.0 if z < 0 else 0.0)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``.

    A flux domain needs ``lo < hi``; degenerate intervals are allowed so
    that one-point sets (e.g. a trivial wave-speed domain) share the type.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(f"interval bounds must be finite, got {self.lo}, {self.hi}")
        if self.lo > self.hi:
            raise ValidationError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def degenerate(self) -> bool:
        return self.hi == self.lo

    def contains(self, u: float, tol: float = STATE_TOL) -> bool:
        return self.lo - tol <= u <= self.hi + tol

    def __iter__(self):
        yield self.lo
        yield self.hi


class PiecewiseLinearFlux:
    """Continuous flux on a closed interval, linear between ``nodes``."""

    __slots__ = ("u", "f", "_ul", "_fl", "tol", "__dict__")

    def __init__(self, nodes: Iterable[Sequence[float]], tol: float = STATE_TOL):
        arr = np.asarray([tuple(map(float, p)) for p in nodes], dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
            raise ValidationError("a flux needs at least two (u, f) nodes")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("flux nodes must be finite")
        if not np.all(np.diff(arr[:, 0]) > 0):
            raise ValidationError("flux node abscissae must be strictly increasing")
        self.u = arr[:, 0].copy()
        self.f = arr[:, 1].copy()
        self.u.setflags(write=False)
        self.f.setflags(write=False)
        self._ul = self.u.tolist()
        self._fl = self.f.tolist()
        self.tol = float(tol)

    # -- basic structure -------------------------------------------------
    @property
    def nodes(self) -> list[tuple[float, float]]:
        return list(zip(self._ul, self._fl))

    @cached_property
    def domain(self) -> Interval:
        return Interval(self._ul[0], self._ul[-1])

    @cached_property
    def slopes(self) -> np.ndarray:
        s = np.diff(self.f) / np.diff(self.u)
        s.setflags(write=False)
        return s

    @cached_property
    def node_spacing(self) -> float:
        return float(np.max(np.diff(self.u)))

    def __len__(self) -> int:
        return len(self._ul)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinearFlux):
            return NotImplemented
        return np.array_equal(self.u, other.u) and np.array_equal(self.f, other.f)

    def __hash__(self):
        return hash((tuple(self._ul), tuple(self._fl)))

    def __repr__(self) -> str:
        return f"PiecewiseLinearFlux({len(self)} nodes on [{self._ul[0]:g}, {self._ul[-1]:g}])"

    def to_literal(self) -> dict:
        return {"nodes": [[u, f] for u, f in zip(self._ul, self._fl)]}

    # -- evaluation --------------------------------------------------------
    def _check(self, u: float) -> float:
        lo, hi = self._ul[0], self._ul[-1]
        if u < lo:
            if u < lo - self.tol:
                raise OutOfDomain(f"state {u!r} below flux domain [{lo}, {hi}]")
            return lo
        if u > hi:
            if u > hi + self.tol:
                raise OutOfDomain(f"state {u!r} above flux domain [{lo}, {hi}]")
            return hi
        return u

    def __call__(self, u):
        if np.ndim(u) == 0:
            return self._eval_scalar(self._check(float(u)))
        arr = np.asarray(u, dtype=float)
        lo, hi = self._ul[0], self._ul[-1]
        if arr.size and (arr.min() < lo - self.tol or arr.max() > hi + self.tol):
            raise OutOfDomain(f"states outside flux domain [{lo}, {hi}]")
        return np.interp(arr, self.u, self.f)

    def _eval_scalar(self, u: float) -> float:
        us, fs = self._ul, self._fl
        i = bisect_right(us, u) - 1
        if i >= len(us) - 1:
            return fs[-1]
        if i < 0:
            return fs[0]
        u0 = us[i]
        if u == u0:
            return fs[i]
        return fs[i] + (fs[i + 1] - fs[i]) * (u - u0) / (us[i + 1] - u0)

    eval = __call__

    def _inner(self, a: float, b: float) -> tuple[int, int]:
        """Index range of nodes strictly inside (a, b), a <= b."""
        return bisect_right(self._ul, a), bisect_left(self._ul, b)

    def min_on(self, a: float, b: float) -> float:
        a, b = self._check(a), self._check(b)
        if a > b:
            a, b = b, a
        i, j = self._inner(a, b)
        m = min(self._eval_scalar(a), self._eval_scalar(b))
        if j > i:
            m = min(m, min(self._fl[i:j]))
        return m

    def max_on(self, a: float, b: float) -> float:
        a, b = self._check(a), self._check(b)
        if a > b:
            a, b = b, a
        i, j = self._inner(a, b)
        m = max(self._eval_scalar(a), self._eval_scalar(b))
        if j > i:
            m = max(m, max(self._fl[i:j]))
        return m

    def osc(self, a: float, b: float) -> float:
        return self.max_on(a, b) - self.min_on(a, b)

    def godunov(self, u_left: float, u_right: float) -> float:
        if u_left <= u_right:
            return self.min_on(u_left, u_right)
        return self.max_on(u_right, u_left)

    def entropy_flux(self, z, k):
        """q(z, k) = sign(z - k) (f(z) - f(k)); vectorizes over arrays."""
        if np.ndim(z) == 0 and np.ndim(k) == 0:
            return sign(z - k) * (self(z) - self(k))
        z = np.asarray(z, dtype=float)
        k = np.asarray(k, dtype=float)
        return np.sign(z - k) * (self(z) - self(k))

    def total_variation(self, a: float, b: float) -> float:
        """Integral of |f'| over [min(a,b), max(a,b)]."""
        a, b = self._check(a), self._check(b)
        if a > b:
            a, b = b, a
        i, j = self._inner(a, b)
        pts = [a] + self._ul[i:j] + [b]
        vals = [self._eval_scalar(p) for p in pts]
        return float(sum(abs(vals[k + 1] - vals[k]) for k in range(len(vals) - 1)))

    # -- singular mapping --------------------------------------------------
    @cached_property
    def _singular_nodes(self) -> np.ndarray:
        du = np.diff(self.u)
        active = np.abs(np.diff(self.f)) > LEVEL_TOL
        v = np.concatenate([[0.0], np.cumsum(np.where(active, du, 0.0))])
        v.setflags(write=False)
        return v

    def singular_map(self, u):
        if np.ndim(u) == 0:
            u = self._check(float(u))
        else:
            self(u)
        return np.interp(u, self.u, self._singular_nodes) if np.ndim(u) else float(
            np.interp(u, self.u, self._singular_nodes)
        )

    @property
    def has_plateau(self) -> bool:
        return bool(np.any(np.abs(np.diff(self.f)) <= LEVEL_TOL))

    # -- Lipschitz bound ---------------------------------------------------
    def lipschitz_bound(self, sub: Interval | None = None) -> float:
        if sub is None:
            return float(np.max(np.abs(self.slopes)))
        lo, hi = self._check(sub.lo), self._check(sub.hi)
        # segments [u_k, u_{k+1}] meeting [lo, hi]
        k0 = max(bisect_right(self._ul, lo) - 1, 0)
        k1 = min(bisect_left(self._ul, hi), len(self._ul) - 1)
        if k1 <= k0:
            k1 = k0 + 1
        seg = self.slopes[k0:k1]
        if lo == hi and lo in self._ul:
            idx = self._ul.index(lo)
            seg = self.slopes[max(idx - 1, 0): idx + 1]
        return float(np.max(np.abs(seg))) if seg.size else 0.0

    # -- level sets --------------------------------------------------------
    def level_set(self, s: float, tol: float = LEVEL_TOL) -> list:
        """Exact preimage of ``s``: floats for isolated points, Interval for plateaus."""
        us, fs = self._ul, self._fl
        out: list = []

        def push_point(p):
            if out:
                last = out[-1]
                if isinstance(last, Interval):
                    if last.lo - tol <= p <= last.hi + tol:
                        return
                elif abs(last - p) <= tol:
                    return
            out.append(p)

        def push_plateau(a, b):
            if out:
                last = out[-1]
                if isinstance(last, Interval) and last.hi >= a - tol:
                    out[-1] = Interval(last.lo, max(last.hi, b))
                    return
                if not isinstance(last, Interval) and last >= a - tol:
                    out.pop()
            out.append(Interval(a, b))

        n = len(us)
        for k in range(n - 1):
            f0, f1 = fs[k] - s, fs[k + 1] - s
            on0, on1 = abs(f0) <= tol, abs(f1) <= tol
            if on0 and on1:
                push_plateau(us[k], us[k + 1])
            elif on0:
                push_point(us[k])
            elif (f0 < 0 < f1) or (f1 < 0 < f0):
                t = f0 / (f0 - f1)
                push_point(us[k] + t * (us[k + 1] - us[k]))
        if abs(fs[-1] - s) <= tol:
            push_point(us[-1])
        return out

    def level_points(self, s: float, tol: float = LEVEL_TOL) -> list[float]:
        """Candidate states at level ``s``: points, plus plateau ends and midpoints."""
        pts: list[float] = []
        for item in self.level_set(s, tol):
            if isinstance(item, Interval):
                pts.extend([item.lo, 0.5 * (item.lo + item.hi), item.hi])
            else:
                pts.append(item)
        return pts

    @cached_property
    def range(self) -> Interval:
        return Interval(float(self.f.min()), float(self.f.max()))

    # -- sup/inf extents used by the germ predicates -------------------------
    def extent(self, start: float, stop: float, s: float, relation: str,
               tol: float = LEVEL_TOL) -> float:
        """Walk from ``start`` toward ``stop`` while ``f relation s`` holds.

        ``relation`` is one of ``">="``, ``"<="``.  Returns the farthest point
        ``z`` between start and stop such that the relation holds on the
        closed segment [start, z] (or [z, start]).  If it fails at ``start``
        itself, ``start`` is returned.
        """
        sgn = 1.0 if relation == ">=" else -1.0

        def ok(v):
            return sgn * (v - s) >= -tol

        if start == stop:
            return start
        step_right = stop > start
        a, b = (start, stop) if step_right else (stop, start)
        i, j = self._inner(a, b)
        inner = self._ul[i:j]
        pts = [start] + (inner if step_right else inner[::-1]) + [stop]
        prev_p, prev_v = pts[0], self._eval_scalar(self._check(pts[0]))
        if not ok(prev_v):
            return start
        for p in pts[1:]:
            v = self._eval_scalar(self._check(p))
            if ok(v):
                prev_p, prev_v = p, v
                continue
            # the relation breaks inside (prev, p]: locate the crossing of s
            t = (prev_v - s) / (prev_v - v) if prev_v != v else 0.0
            return prev_p + min(max(t, 0.0), 1.0) * (p - prev_p)
        return stop

    def holds_on(self, a: float, b: float, s: float, relation: str,
                 include_a: bool = True, include_b: bool = True,
                 tol: float = LEVEL_TOL) -> bool:
        """Check ``f(z) relation s`` for z in the interval between a and b.

        ``relation`` is ``">"``, ``"<"``, ``">="`` or ``"<="``.  Strict
        relations treat equality within ``tol`` as failure; endpoint
        inclusion flags select open or closed ends.
        """
        if a > b:
            a, b = b, a
            include_a, include_b = include_b, include_a
        a, b = self._check(a), self._check(b)
        sgn = 1.0 if relation in (">", ">=") else -1.0
        strict = relation in (">", "<")
        if a == b:
            if not (include_a and include_b):
                return True
            v = sgn * (self._eval_scalar(a) - s)
            return v > tol if strict else v >= -tol
        i, j = self._inner(a, b)
        va = sgn * (self._eval_scalar(a) - s)
        vb = sgn * (self._eval_scalar(b) - s)
        inner = [sgn * (x - s) for x in self._fl[i:j]]
        if not strict:
            vals = inner + ([va] if include_a else []) + ([vb] if include_b else [])
            if any(v < -tol for v in vals):
                return False
            # open ends: value at the endpoint may dip below only in the limit
            if not include_a and va < -tol:
                return False
            if not include_b and vb < -tol:
                return False
            return True
        if any(v <= tol for v in inner):
            return False
        if include_a and va <= tol:
            return False
        if include_b and vb <= tol:
            return False
        if va < -tol or vb < -tol:
            return False
        if not inner and va <= tol and vb <= tol:
            return False
        return True


def _as_flux(flux) -> PiecewiseLinearFlux:
    if not isinstance(flux, PiecewiseLinearFlux):
        raise TypeError(f"expected PiecewiseLinearFlux, got {type(flux).__name__}")
    return flux


def evaluate(flux: PiecewiseLinearFlux, u):
    return _as_flux(flux)(u)


def osc(flux: PiecewiseLinearFlux, a: float, b: float) -> float:
    return _as_flux(flux).osc(a, b)


def singular_map(flux: PiecewiseLinearFlux, u):
    return _as_flux(flux).singular_map(u)


def entropy_flux(flux: PiecewiseLinearFlux, z, k):
    return _as_flux(flux).entropy_flux(z, k)


def godunov_flux(flux: PiecewiseLinearFlux, u_left: float, u_right: float) -> float:
    return _as_flux(flux).godunov(u_left, u_right)


def lipschitz_bound(flux: PiecewiseLinearFlux, sub: Interval | None = None) -> float:
    return _as_flux(flux).lipschitz_bound(sub)


def level_set(flux: PiecewiseLinearFlux, s: float, tol: float = LEVEL_TOL) -> list:
    return _as_flux(flux).level_set(s, tol)


class FluxPair:
    """Left flux on x<0, right flux on x>0, sharing one state interval."""

    def __init__(self, left: PiecewiseLinearFlux, right: PiecewiseLinearFlux):
        if left.domain != right.domain:
            raise FluxMismatch(
                f"left domain {tuple(left.domain)} differs from right domain {tuple(right.domain)}"
            )
        self.left = left
        self.right = right

    @property
    def domain(self) -> Interval:
        return self.left.domain

    @property
    def same(self) -> bool:
        return self.left == self.right

    def side(self, which: str) -> PiecewiseLinearFlux:
        return self.left if which == "left" else self.right

    def __eq__(self, other):
        if not isinstance(other, FluxPair):
            return NotImplemented
        return self.left == other.left and self.right == other.right

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return f"FluxPair(left={self.left!r}, right={self.right!r})"

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Union of node abscissae and of the points where the two graphs cross."""
        merged = np.union1d(self.left.u, self.right.u)
        d = self.right(merged) - self.left(merged)
        pts = [merged]
        for k in range(len(merged) - 1):
            d0, d1 = d[k], d[k + 1]
            if (d0 < 0 < d1) or (d1 < 0 < d0):
                t = d0 / (d0 - d1)
                pts.append(np.array([merged[k] + t * (merged[k + 1] - merged[k])]))
        out = np.unique(np.concatenate(pts))
        out.setflags(write=False)
        return out

    @cached_property
    def crossings(self) -> list[float]:
        """Abscissae where f^l = f^r (isolated points only)."""
        b = self.breakpoints
        d = self.right(b) - self.left(b)
        out = []
        for k, x in enumerate(b):
            if abs(d[k]) <= LEVEL_TOL:
                left_nz = k > 0 and abs(d[k - 1]) > LEVEL_TOL
                right_nz = k + 1 < len(b) and abs(d[k + 1]) > LEVEL_TOL
                if left_nz or right_nz or len(b) == 1:
                    out.append(float(x))
        return out

    def to_literal(self) -> dict:
        return {"left": self.left.to_literal(), "right": self.right.to_literal()}


# -- generators -------------------------------------------------------------

def sampled(fn: Callable[[float], float], domain: tuple[float, float], count: int,
            extra: Iterable[float] = ()) -> PiecewiseLinearFlux:
    """Chord interpolant of ``fn`` at ``count`` uniform nodes (plus ``extra``)."""
    lo, hi = map(float, domain)
    if count < 2:
        raise ValidationError("node count must be at least 2")
    if not lo < hi:
        raise ValidationError(f"domain needs lo < hi, got {domain}")
    us = np.linspace(lo, hi, int(count))
    extra = [float(e) for e in extra if lo < float(e) < hi]
    if extra:
        us = np.union1d(us, extra)
    return PiecewiseLinearFlux([(u, float(fn(u))) for u in us])


def burgers(count: int = 5, domain: tuple[float, float] = (-1.0, 1.0)) -> PiecewiseLinearFlux:
    return sampled(lambda u: 0.5 * u * u, domain, count)


def tent(u0: float = 0.0, count: int = 2, domain: tuple[float, float] = (-1.0, 1.0)) -> PiecewiseLinearFlux:
    """|u - u0|; the kink is always a node so the chord flux is exact."""
    return sampled(lambda u: abs(u - u0), domain, count, extra=[u0])


def bell(a: float = 1.0, count: int = 201, domain: tuple[float, float] = (0.0, 1.0)) -> PiecewiseLinearFlux:
    return sampled(lambda u: a * u * (1.0 - u), domain, count)


_GEN_RE = re.compile(r"^\s*(burgers|tent|bell)\s*(?:\(\s*([-+0-9.eE]*)\s*\))?\s*$")

_GEN_DEFAULTS = {
    "burgers": ((-1.0, 1.0), 5),
    "tent": ((-1.0, 1.0), 2),
    "bell": ((0.0, 1.0), 201),
}


def from_generator(name: str, count: int | None = None,
                   domain: Sequence[float] | None = None) -> PiecewiseLinearFlux:
    """Build a flux from ``"burgers"``, ``"tent(u0)"`` or ``"bell(a)"``."""
    m = _GEN_RE.match(name)
    if not m:
        raise ValidationError(f"unknown flux generator {name!r}")
    kind, arg = m.group(1), m.group(2)
    dom_default, count_default = _GEN_DEFAULTS[kind]
    dom = tuple(map(float, domain)) if domain is not None else dom_default
    n = int(count) if count is not None else count_default
    try:
        param = float(arg) if arg else None
    except ValueError as exc:
        raise ValidationError(f"bad generator parameter in {name!r}") from exc
    if kind == "burgers":
        if param is not None:
            raise ValidationError("burgers takes no parameter")
        return burgers(n, dom)
    if kind == "tent":
        return tent(0.0 if param is None else param, n, dom)
    return bell(1.0 if param is None else param, n, dom)


def flux_from_literal(obj, count: int | None = None,
                      domain: Sequence[float] | None = None) -> PiecewiseLinearFlux:
    """Parse ``{"nodes": [[u, f], ...]}``, a generator string, or
    ``{"generator": "...", "count": n, "domain": [lo, hi]}``."""
    if isinstance(obj, str):
        return from_generator(obj, count, domain)
    if isinstance(obj, dict):
        if "nodes" in obj:
            extra = set(obj) - {"nodes"}
            if extra:
                raise ValidationError(f"unknown flux keys {sorted(extra)}")
            return PiecewiseLinearFlux(obj["nodes"])
        if "generator" in obj:
            extra = set(obj) - {"generator", "count", "domain"}
            if extra:
                raise ValidationError(f"unknown flux keys {sorted(extra)}")
            return from_generator(obj["generator"], obj.get("count", count),
                                  obj.get("domain", domain))
    raise ValidationError(f"cannot interpret flux literal {obj!r}")
