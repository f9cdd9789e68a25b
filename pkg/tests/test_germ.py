import numpy as np
import pytest

from germsolver import flux, germ
from germsolver.errors import EmptyRange, FluxMismatch, FluxShapeMismatch, RHViolation, ValidationError
from germsolver.flux import FluxPair, PiecewiseLinearFlux
from germsolver.germ import GermSpec

B_EXACT = (1 - np.sqrt(0.5)) / 2


@pytest.fixture(scope="module")
def burgers_pair():
    b = flux.burgers()
    return FluxPair(b, b)


@pytest.fixture(scope="module")
def tents():
    return FluxPair(flux.tent(0.0, domain=(-1, 2)), flux.tent(1.0, domain=(-1, 2)))


@pytest.fixture(scope="module")
def bells():
    return FluxPair(flux.bell(1.0), flux.bell(2.0))


def test_gelfand(burgers_pair):
    g = GermSpec("Gelfand", burgers_pair)
    assert g.contains((1, -1))
    assert not g.contains((-1, 1))


def test_audusse_perthame(tents):
    assert GermSpec("AP", tents).contains((-0.5, 0.5))


def test_krt_pairs_not_l1d(tents):
    g = GermSpec("KRT", tents)
    assert g.contains((-0.25, 1.25)) and g.contains((0, 1))
    res = germ.is_l1d(germ.GermSample([(-0.25, 1.25), (0, 1)], tents))
    assert not res.ok
    assert set(map(tuple, res.witness)) == {(-0.25, 1.25), (0.0, 1.0)}


def test_vkr_diagonal(burgers_pair):
    s = germ.sample(GermSpec("VolpertKruzhkov", burgers_pair), 5)
    assert all(p.ul == p.ur for p in s.pairs)
    assert GermSpec("VKr", burgers_pair).contains((0.37, 0.37))


def test_connection_sample_single_pair(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    assert g.B == pytest.approx(B_EXACT, abs=2e-5)
    assert g.params["B_given"] == 0.146447
    s = germ.sample(g, 41)
    assert len(s) == 1
    assert s.rows()[0][2] == pytest.approx(0.25)


def test_connection_rh_enforced(bells):
    with pytest.raises(RHViolation):
        GermSpec.connection(bells, 0.5, 0.3)


def test_shape_checks(burgers_pair, bells):
    with pytest.raises(FluxShapeMismatch):
        GermSpec("Gelfand", bells)
    with pytest.raises(FluxShapeMismatch):
        GermSpec("ABDual", burgers_pair, {"A": 0.0, "B": 0.0})


def test_empty_range():
    fp = FluxPair(PiecewiseLinearFlux([(0, 0), (1, 1)]), PiecewiseLinearFlux([(0, 2), (1, 3)]))
    with pytest.raises(EmptyRange):
        germ.sample(GermSpec("RH", fp), 11)


def test_explicit_fantasque_is_l1d(burgers_pair):
    s = germ.GermSample([(1, -1), (-1, 1)], burgers_pair)
    assert germ.is_l1d(s).ok
    assert germ.is_l1d(germ.GermSample([(0.2, 0.2)], burgers_pair)).ok


def test_krt_sample_witness_shape(tents):
    res = germ.is_l1d(germ.sample(GermSpec("KRT", tents), 21))
    assert not res.ok
    (a, b), (c, d) = res.witness
    # one pair of the form (-s, 1 + s), the other the crossing pair (0, 1)
    pairs = {(a, b), (c, d)}
    assert (0.0, 1.0) in pairs
    other = (pairs - {(0.0, 1.0)}).pop()
    assert other[1] == pytest.approx(1 - other[0])


def test_dual_contains_maximal_germ(burgers_pair):
    g = germ.sample(GermSpec("VV", burgers_pair), 41)
    d = germ.dual(g, 41)
    dual_set = {(round(p.ul, 12), round(p.ur, 12)) for p in d.pairs}
    assert all((round(p.ul, 12), round(p.ur, 12)) in dual_set for p in g.pairs)


def test_dual_of_connection_is_abdual(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    d = germ.dual(germ.sample(g, 61), 61)
    ab = GermSpec("ABDual", bells, {"A": g.A, "B": g.B})
    assert np.all(ab.contains_many(d.ul, d.ur))
    cand = germ._rh_candidates(bells, np.linspace(0, 0.25, 61))
    ins = ab.contains_many(cand[:, 0], cand[:, 1])
    dual_spec = GermSpec("Dual", bells, {"pairs": [[g.A, g.B]]})
    assert np.array_equal(ins, dual_spec.contains_many(cand[:, 0], cand[:, 1]))


def test_closure_trivial_for_monotone():
    fp = FluxPair(PiecewiseLinearFlux([(0, 0), (1, 1)]), PiecewiseLinearFlux([(0, 0), (1, 2)]))
    s = germ.GermSample([(0.3, 0.15)], fp)
    assert len(germ.closure(s)) == 1


def test_closure_adds_right_contact_for_abs():
    fp = FluxPair(flux.tent(0.0), flux.tent(0.0))
    c = germ.closure(germ.GermSample([(0.5, 0.5)], fp))
    assert any(p.ul == pytest.approx(0.5) and p.ur == pytest.approx(-0.5) for p in c.pairs)
    # the rising jump is a rarefaction, not a left contact
    assert not any(p.ul == pytest.approx(-0.5) for p in c.pairs)


def test_closure_of_gelfand_excludes_rising_jump(burgers_pair):
    c = germ.closure(germ.sample(GermSpec("Gelfand", burgers_pair), 21))
    assert (-1.0, 1.0) not in c


def test_definiteness(burgers_pair, tents, bells):
    assert germ.definiteness_probe(GermSpec("VKr", burgers_pair), 41).verdict == "definite-at-resolution"
    assert germ.definiteness_probe(GermSpec("KRT", tents), 41).verdict == "not-definite"
    ex = GermSpec("Explicit", bells, {"pairs": [[0.5, 0.14645390070921985]]})
    assert germ.definiteness_probe(ex, 41).verdict == "definite-at-resolution"


def test_completeness():
    inc = FluxPair(PiecewiseLinearFlux([(0, 0), (1, 1)]), PiecewiseLinearFlux([(0, 0), (0.5, 0.8), (1, 1)]))
    assert germ.completeness_check(germ.sample(GermSpec("RH", inc), 41), 41).coverage == 1.0
    dec = FluxPair(PiecewiseLinearFlux([(0, 0), (1, 1)]), PiecewiseLinearFlux([(0, 1), (1, 0)]))
    rep = germ.completeness_check(germ.sample(GermSpec("RH", dec), 41), 41)
    assert rep.coverage < 1 and rep.uncovered


def test_remainder(bells):
    g = GermSpec.connection(bells, 0.5, 0.146447)
    s = germ.sample(g, 11)
    assert germ.remainder(s, g.A, g.B) == 0.0
    assert germ.remainder(s, 0.5, 0.5) == pytest.approx(0.5, abs=1e-4)


def test_remainder_dominates_defect(bells):
    s = germ.sample(GermSpec("VV", bells), 21)
    fl, fr = bells.left, bells.right
    for cl, cr in [(0.1, 0.9), (0.7, 0.2), (0.5, 0.5)]:
        R = germ.remainder(s, cl, cr)
        defect = max(fr.entropy_flux(b, cr) - fl.entropy_flux(a, cl) for a, b in s.pairs_array.tolist())
        assert defect <= R + 1e-12


def test_germ_distance(bells, burgers_pair, tents):
    s = germ.sample(GermSpec("VV", burgers_pair), 21)
    assert germ.germ_distance(s, s) <= 1e-12
    g1 = germ.sample(GermSpec.connection(bells, 0.7).maximal(), 51)
    g2 = germ.sample(GermSpec.connection(bells, 0.72).maximal(), 51)
    assert germ.germ_distance(g1, g2) > 0
    with pytest.raises(FluxMismatch):
        germ.germ_distance(s, germ.sample(GermSpec("KRT", tents), 11))


def test_literal_parsing(bells):
    g = germ.germ_from_literal({"kind": "connection", "params": {"A": 0.5, "B": 0.146447}}, bells)
    assert g.kind == "Connection"
    with pytest.raises(ValidationError):
        germ.germ_from_literal({"kind": "VV", "extra": 1}, bells)
    with pytest.raises(ValidationError):
        germ.germ_from_literal({"kind": "nope"}, bells)
    e = germ.germ_from_literal({"pairs": [[0.5, g.B]]}, bells)
    assert e.kind == "Explicit" and not e.enumerable


def test_vv_open_inside_vv(bells):
    cand = germ._rh_candidates(bells, np.linspace(0, 0.25, 41))
    o = GermSpec("VVOpen", bells).contains_many(cand[:, 0], cand[:, 1])
    c = GermSpec("VV", bells).contains_many(cand[:, 0], cand[:, 1])
    assert np.all(c[o])
