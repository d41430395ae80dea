import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from deconvkit.errors import ConfigInvalid, UndefinedMoment, UnsupportedKernel
from deconvkit.kernels import (KernelOrder, KernelSpec, eval_kernel, eval_phi_K,
                               eval_phi_K_deriv, kernel_moment)

FP_NAMES = ["fp:r=2,s=1", "fp:r=2,s=2", "fp:r=2,s=3"]


def test_phi_values():
    k = KernelSpec.parse("fp:r=2,s=2")
    assert eval_phi_K(k, 0.0) == 1.0
    assert eval_phi_K(k, 0.5) == pytest.approx(0.5625, abs=1e-15)
    assert eval_phi_K(k, 1.5) == 0.0
    assert eval_phi_K(KernelSpec.sinc(), 4.0) == 0.0
    assert eval_phi_K(KernelSpec.sinc(), 3.1) == 1.0


def test_parse_round_trip():
    for name in FP_NAMES + ["sinc"]:
        assert KernelSpec.parse(name).name == name
    with pytest.raises(ConfigInvalid):
        KernelSpec.parse("fp:r=3,s=2")
    with pytest.raises(ConfigInvalid):
        KernelSpec.parse("gaussian")


@pytest.mark.parametrize("r,s,t,order,expected", [
    (2, 2, 0.0, 2, -4.0),
    (2, 3, 0.0, 1, 0.0),
    (2, 1, 0.5, 1, -1.0),
])
def test_phi_deriv_examples(r, s, t, order, expected):
    assert eval_phi_K_deriv(KernelSpec.fourier_polynomial(r, s), t, order) == pytest.approx(expected, abs=1e-14)


def test_phi_deriv_hand_formula():
    # (1 - t^2)^2: phi'' = -4 + 12 t^2
    t = np.linspace(-0.9, 0.9, 13)
    k = KernelSpec.fourier_polynomial(2, 2)
    np.testing.assert_allclose(eval_phi_K_deriv(k, t, 2), -4 + 12 * t ** 2, atol=1e-13)


@pytest.mark.parametrize("name", FP_NAMES + ["fp:r=4,s=3"])
@pytest.mark.parametrize("order", [1, 2])
def test_phi_deriv_matches_finite_differences(name, order):
    k = KernelSpec.parse(name)
    if k.s < order:
        pytest.skip("derivative not defined")
    t = np.linspace(-0.95, 0.95, 20)
    d = 1e-3
    f = lambda x: eval_phi_K(k, x)
    # fourth-order central stencils
    if order == 1:
        fd = (-f(t + 2 * d) + 8 * f(t + d) - 8 * f(t - d) + f(t - 2 * d)) / (12 * d)
    else:
        fd = (-f(t + 2 * d) + 16 * f(t + d) - 30 * f(t) + 16 * f(t - d) - f(t - 2 * d)) / (12 * d * d)
    np.testing.assert_allclose(eval_phi_K_deriv(k, t, order), fd, atol=1e-6)


def test_phi_deriv_boundary_and_outside():
    k = KernelSpec.fourier_polynomial(2, 3)
    assert eval_phi_K_deriv(k, 1.0, 2) == 0.0
    assert eval_phi_K_deriv(k, -1.0, 1) == 0.0
    assert eval_phi_K_deriv(k, 1.3, 1) == 0.0
    # s == order: interior one-sided limit
    assert eval_phi_K_deriv(KernelSpec.fourier_polynomial(2, 1), 1.0, 1) == -2.0


def test_phi_deriv_rejects():
    with pytest.raises(UnsupportedKernel):
        eval_phi_K_deriv(KernelSpec.sinc(), 0.1, 1)
    with pytest.raises(UnsupportedKernel):
        eval_phi_K_deriv(KernelSpec.fourier_polynomial(2, 1), 0.1, 2)


def test_sinc_values():
    k = KernelSpec.sinc()
    assert eval_kernel(k, 0.0) == 1.0
    assert eval_kernel(k, 1.0) == 0.0
    assert eval_kernel(k, 0.5) == pytest.approx(2 / np.pi, abs=1e-12)
    assert eval_kernel(k, 0.5) == pytest.approx(0.6366198, abs=1e-7)
    assert np.all(eval_kernel(k, np.arange(1.0, 50.0)) == 0.0)


@pytest.mark.parametrize("name", FP_NAMES)
def test_fp_kernel_at_zero(name):
    k = KernelSpec.parse(name)
    ref, _ = integrate.quad(lambda t: eval_phi_K(k, t), -1, 1, epsabs=1e-14)
    assert eval_kernel(k, 0.0) == pytest.approx(ref / (2 * np.pi), abs=1e-10)


@pytest.mark.parametrize("name", FP_NAMES)
def test_fp_kernel_against_adaptive_quadrature(name):
    k = KernelSpec.parse(name)
    for x in (0.3, 2.0, 7.5):
        ref, _ = integrate.quad(lambda t: eval_phi_K(k, t) * np.cos(t * x), -1, 1, epsabs=1e-14, limit=200)
        assert eval_kernel(k, x) == pytest.approx(ref / (2 * np.pi), abs=1e-9)


@pytest.mark.parametrize("name", FP_NAMES)
def test_fp_kernel_mass_on_window(name):
    # the mass on [-50, 50] is (1/pi) int phi_K(t) sin(50 t)/t dt, not exactly 1
    k = KernelSpec.parse(name)
    x = np.linspace(-50, 50, 20001)
    exact, _ = integrate.quad(lambda t: eval_phi_K(k, t) * 50 * np.sinc(50 * t / np.pi), -1, 1,
                              limit=400, epsabs=1e-15)
    assert integrate.trapezoid(eval_kernel(k, x), x) == pytest.approx(exact / np.pi, abs=1e-8)


@pytest.mark.parametrize("name", ["fp:r=2,s=2", "fp:r=2,s=3"])
def test_fp_kernel_unit_mass(name):
    k = KernelSpec.parse(name)
    x = np.linspace(-400, 400, 160001)
    assert integrate.trapezoid(eval_kernel(k, x), x) == pytest.approx(1.0, abs=1e-6)


def test_sinc_normalisation_witness():
    assert eval_phi_K(KernelSpec.sinc(), 0.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-40, 40), name=st.sampled_from(FP_NAMES + ["sinc"]))
def test_kernel_even(x, name):
    k = KernelSpec.parse(name)
    assert abs(eval_kernel(k, x) - eval_kernel(k, -x)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(t=st.floats(-5, 5), name=st.sampled_from(FP_NAMES + ["sinc", "fp:r=4,s=2"]))
def test_phi_even_and_bounded(t, name):
    k = KernelSpec.parse(name)
    assert eval_phi_K(k, t) == eval_phi_K(k, -t)
    assert 0.0 <= eval_phi_K(k, t) <= 1.0


@pytest.mark.parametrize("s,kappa", [(2, 4.0), (3, 6.0), (1, 2.0)])
def test_kernel_moment(s, kappa):
    k = KernelSpec.fourier_polynomial(2, s)
    m = kernel_moment(k)
    assert m.kappa == pytest.approx(kappa, abs=1e-12)
    assert m.order is KernelOrder.SECOND
    # independent oracle: second difference of phi_K at 0
    d = 1e-4
    fd = (eval_phi_K(k, d) - 2 * eval_phi_K(k, 0.0) + eval_phi_K(k, -d)) / d ** 2
    assert m.kappa == pytest.approx(-fd, rel=1e-6)


def test_kernel_moment_triweight_quadrature():
    # x^2 K(x) is absolutely integrable for s = 3 (K decays like |x|^-4)
    k = KernelSpec.fourier_polynomial(2, 3)
    x = np.linspace(-400, 400, 160001)
    approx = integrate.trapezoid(x ** 2 * eval_kernel(k, x), x)
    assert approx == pytest.approx(6.0, abs=0.05)


def test_kernel_moment_undefined():
    with pytest.raises(UndefinedMoment):
        kernel_moment(KernelSpec.sinc())
    with pytest.raises(UndefinedMoment):
        kernel_moment(KernelSpec.fourier_polynomial(2, 0))
