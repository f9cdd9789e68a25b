import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from germsolver import flux
from germsolver.errors import FluxMismatch, OutOfDomain, ValidationError
from germsolver.flux import FluxPair, Interval, PiecewiseLinearFlux


@pytest.fixture
def burgers():
    return flux.burgers()


@pytest.fixture
def absu():
    return flux.tent(0.0, domain=(-1, 1))


def test_burgers_nodes_and_chord_value(burgers):
    assert burgers(0.5) == pytest.approx(0.125)
    assert burgers(0.25) == pytest.approx(0.0625)
    assert burgers(-1.0) == pytest.approx(0.5)


def test_eval_vectorized_matches_scalar(burgers):
    u = np.linspace(-1, 1, 17)
    assert np.allclose(burgers(u), [burgers(float(v)) for v in u])


def test_out_of_domain(burgers):
    with pytest.raises(OutOfDomain):
        burgers(1.5)
    # within tolerance clamps silently
    assert burgers(1.0 + 1e-13) == pytest.approx(0.5)


def test_osc():
    sq = PiecewiseLinearFlux([(0, 0), (0.5, 0.25), (1, 1)])
    assert sq.osc(0, 1) == 1.0
    assert sq.osc(0.3, 0.3) == 0.0
    assert flux.tent(0.0).osc(-1, 1) == 1.0


def test_singular_map():
    inc = PiecewiseLinearFlux([(0, 0), (1, 2)])
    assert inc.singular_map(0.4) == pytest.approx(0.4)
    flat = PiecewiseLinearFlux([(0, 0), (0.3, 0.3), (0.6, 0.3), (1, 0.7)])
    assert flat.singular_map(1.0) == pytest.approx(0.7)
    assert flat.singular_map(0.0) == 0.0


def test_entropy_flux(burgers, absu):
    assert burgers.entropy_flux(1, -1) == 0.0
    assert burgers.entropy_flux(0.3, 0.3) == 0.0
    assert absu.entropy_flux(1, 0) == 1.0


def test_godunov(burgers):
    assert burgers.godunov(1, -1) == pytest.approx(0.5)
    assert burgers.godunov(-1, 1) == pytest.approx(0.0)
    assert burgers.godunov(0.3, 0.3) == pytest.approx(burgers(0.3))


def test_lipschitz(burgers, absu):
    assert burgers.lipschitz_bound(Interval(-1, 1)) == pytest.approx(0.75)
    assert burgers.lipschitz_bound(Interval(-0.4, 0.4)) == pytest.approx(0.25)
    assert PiecewiseLinearFlux([(0, 1), (1, 1)]).lipschitz_bound() == 0.0
    assert absu.lipschitz_bound() == 1.0


def test_level_set(absu):
    assert sorted(absu.level_set(0.5)) == pytest.approx([-0.5, 0.5])
    assert absu.level_set(3.0) == []
    plateau = PiecewiseLinearFlux([(0, 0), (0.3, 0.4), (0.6, 0.4), (1, 1)])
    segs = [p for p in plateau.level_set(0.4) if isinstance(p, Interval)]
    assert segs and segs[0].lo == pytest.approx(0.3) and segs[0].hi == pytest.approx(0.6)


def test_validation():
    with pytest.raises(ValidationError):
        PiecewiseLinearFlux([(0, 0)])
    with pytest.raises(ValidationError):
        PiecewiseLinearFlux([(0, 0), (0, 1)])


def test_pair_domains_must_match():
    with pytest.raises(FluxMismatch):
        FluxPair(flux.burgers(), flux.bell(1.0))


def test_literals_round_trip():
    f = flux.flux_from_literal("bell(2)", count=11)
    g = flux.flux_from_literal(f.to_literal())
    assert f == g
    assert flux.flux_from_literal({"generator": "tent(1)", "domain": [-1, 2]})(2.0) == 1.0
    with pytest.raises(ValidationError):
        flux.flux_from_literal({"nodes": [[0, 0], [1, 1]], "extra": 1})


def test_tent_kink_is_a_node():
    f = flux.tent(0.3, count=2, domain=(0, 1))
    assert f(0.3) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_godunov_bounds_and_monotonicity(a, b):
    f = flux.burgers()
    g = f.godunov(a, b)
    lo, hi = min(a, b), max(a, b)
    assert f.min_on(lo, hi) - 1e-15 <= g <= f.max_on(lo, hi) + 1e-15
    # nondecreasing in the first argument, nonincreasing in the second
    assert f.godunov(min(a + 0.1, 1), b) >= g - 1e-15
    assert f.godunov(a, min(b + 0.1, 1)) <= g + 1e-15


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_osc_is_range_width(a, b):
    f = flux.burgers()
    xs = np.linspace(min(a, b), max(a, b), 401)
    assert f.osc(a, b) >= np.ptp(f(xs)) - 1e-12
