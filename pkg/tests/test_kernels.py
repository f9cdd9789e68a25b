import numpy as np
import pytest

from germsolver import _kernels_py, flux, kernels


def _arrays():
    fl, fr = flux.bell(1.0, count=41), flux.bell(2.0, count=41)
    return fl.u.copy(), fl.f.copy(), fr.u.copy(), fr.f.copy()


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("kind", [0, 1, 2])
def test_fv_step_parity(kind):
    if kernels.BACKEND == "python":
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(kind)
    u = rng.random(64)
    xl, fl, xr, fr = _arrays()
    a, b = np.empty_like(u), np.empty_like(u)
    ga = kernels.fv_step(u, a, xl, fl, xr, fr, 32, 0.4, 0.1, kind, 1.0, 2.0)
    gb = _kernels_py.fv_step(u, b, xl, fl, xr, fr, 32, 0.4, 0.1, kind, 1.0, 2.0)
    assert np.allclose(a, b, atol=1e-14, rtol=0)
    assert np.allclose(ga, gb, atol=1e-15)


def test_parabolic_step_parity():
    if kernels.BACKEND == "python":
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(11)
    u = rng.random(50)
    xl, fl, xr, fr = _arrays()
    ax = np.array([0.0, 0.3, 1.0])
    af = np.array([0.0, 0.6, 1.0])
    a, b = np.empty_like(u), np.empty_like(u)
    kernels.parabolic_step(u, a, xl, fl, xr, fr, ax, af, ax, ax.copy(), 20, 0.2, 0.3, 0.05, 0, 1.0, 2.0)
    _kernels_py.parabolic_step(u, b, xl, fl, xr, fr, ax, af, ax, ax.copy(), 20, 0.2, 0.3, 0.05, 0, 1.0, 2.0)
    assert np.allclose(a, b, atol=1e-14, rtol=0)


def test_rk4_parity():
    if kernels.BACKEND == "python":
        pytest.skip("compiled extension not built")
    x, f, _, _ = _arrays()
    args = (x, f, 0.1, 0.5, 0.01, 5000, 0.0, 1.0, 0.1127016653792583, 1e-9)
    wa, na, ea = kernels.rk4_profile(*args)
    wb, nb, eb = _kernels_py.rk4_profile(*args)
    assert na == nb and ea == eb
    assert np.allclose(wa, wb, atol=1e-13)


def test_constant_state_is_stationary():
    xl, fl, xr, fr = _arrays()
    u = np.full(20, 0.3)
    out = np.empty_like(u)
    kernels.fv_step(u, out, xl, fl, xl, fl, 10, 0.5, float(np.interp(0.3, xl, fl)), 0, 1.0, 1.0)
    assert np.allclose(out, 0.3, atol=1e-15)
