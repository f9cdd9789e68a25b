import numpy as np
import pytest

from germsolver import flux, scheme, viscous
from germsolver.errors import (CFLRatioViolated, DegenerateSlope, RHViolation,
                               StabilityViolation, ValidationError)
from germsolver.flux import FluxPair
from germsolver.germ import GermSpec
from germsolver.scheme import MeshConfig


@pytest.fixture(scope="module")
def burgers_pair():
    b = flux.burgers()
    return FluxPair(b, b)


@pytest.fixture(scope="module")
def bells():
    return FluxPair(flux.bell(1.0), flux.bell(2.0))


@pytest.fixture(scope="module")
def tents():
    return FluxPair(flux.tent(0.0, domain=(-1, 2)), flux.tent(1.0, domain=(-1, 2)))


def test_standing_wave_shock_connects(burgers_pair):
    p = viscous.standing_wave(burgers_pair, (1, -1))
    assert p.connects
    assert p.limits[0] == pytest.approx(1, abs=1e-5)
    assert p.limits[1] == pytest.approx(-1, abs=1e-5)
    assert np.all(np.diff(p.w) <= 1e-12)


def test_standing_wave_rising_jump_diverges(burgers_pair):
    assert viscous.standing_wave(burgers_pair, (-1, 1)).verdict == "diverges"


def test_standing_wave_trivial_pair(burgers_pair):
    assert viscous.standing_wave(burgers_pair, (0.3, 0.3)).connects


def test_standing_wave_tents(tents):
    assert viscous.standing_wave(tents, (-0.25, 0.75)).connects


def test_standing_wave_requires_rh(bells):
    with pytest.raises(RHViolation):
        viscous.standing_wave(bells, (0.2, 0.6))


def test_non_vv_connection_has_no_identity_profile(bells):
    g = GermSpec.connection(bells, 0.7)
    assert not viscous.standing_wave(bells, (g.A, g.B)).connects


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.4])
def test_smoothed_profile_shock(burgers_pair, eps):
    p = viscous.smoothed_profile(burgers_pair, (1, -1), eps, 0.1)
    assert p.connects
    assert np.all(np.diff(p.xi) > 0)


def test_smoothed_profile_ratio_guard(burgers_pair):
    with pytest.raises(CFLRatioViolated):
        viscous.smoothed_profile(burgers_pair, (1, -1), 0.1, 1.0)
    with pytest.raises(ValidationError):
        viscous.smoothed_profile(burgers_pair, (1, -1), 0.0, 0.1)


def test_adapted_viscosity(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    v = viscous.adapted_viscosity(bells, g.A, g.B, 0.5)
    assert v.a_left(g.A) == pytest.approx(0.5)
    assert v.a_right(g.B) == pytest.approx(0.5)
    assert v.min_slope > 0 and not v.is_identity
    assert viscous.adapted_viscosity(bells, 1.0, 0.0, 0.0).is_identity


def test_adapted_viscosity_errors(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    with pytest.raises(ValidationError):
        viscous.adapted_viscosity(bells, g.A, g.B, 0.0)
    with pytest.raises(ValidationError):
        viscous.adapted_viscosity(bells, 1.0, 0.0, 0.5)
    with pytest.raises(RHViolation):
        viscous.adapted_viscosity(bells, 0.5, 0.3, 0.5)
    with pytest.raises(DegenerateSlope):
        viscous.adapted_viscosity(bells, 0.0, 0.0, 0.5)


def test_parabolic_stability_guard(burgers_pair):
    m = MeshConfig(0.02, 1, 0.2)
    with pytest.raises(StabilityViolation):
        viscous.run_parabolic(burgers_pair, None, 0.1, m, scheme.RiemannData(1, -1), dt=0.01)


def test_parabolic_conserves_mass(burgers_pair):
    m = MeshConfig(0.02, 1, 0.2)
    s = viscous.run_parabolic(burgers_pair, None, 0.05, m, scheme.RiemannData(1, -1))
    assert abs(s.mass()[-1] - s.mass()[0]) < 1e-12
    assert s.meta["clamped"] == 0


def test_zero_viscosity_reduces_to_scheme(burgers_pair):
    m = MeshConfig(0.02, 1, 0.2)
    s0 = viscous.run_parabolic(burgers_pair, None, 0.0, m, scheme.RiemannData(1, -1))
    ref = scheme.run(m, GermSpec("VV", burgers_pair), burgers_pair, scheme.RiemannData(1, -1))
    assert np.array_equal(s0.final, ref.final)


def test_adapted_viscosity_keeps_connection_steady(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    v = viscous.adapted_viscosity(bells, g.A, g.B, 0.5)
    m = MeshConfig(0.02, 1, 0.2)
    s = viscous.run_parabolic(bells, v, 0.05, m, scheme.RiemannData(g.A, g.B))
    assert np.max(np.abs(s.final - s.u0)) < 1e-10
