import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from deconvkit.error_models import (ErrorModel, ReplicatedSample, estimate_abs_phi_U, phi_U,
                                    sample_error)
from deconvkit.errors import ConfigInvalid, InsufficientReplicates

MODELS = [ErrorModel.laplace(1.0), ErrorModel.laplace(0.3), ErrorModel.gaussian(0.7), ErrorModel.degenerate()]


def test_phi_examples():
    assert phi_U(ErrorModel.laplace(1.0), 0.0) == 1.0
    assert phi_U(ErrorModel.laplace(1.0), 1.0) == 0.5
    assert phi_U(ErrorModel.degenerate(), 7.3) == 1.0


@pytest.mark.parametrize("model", MODELS[:3], ids=str)
def test_phi_against_density_quadrature(model):
    for t in (0.0, 0.4, 1.0, 2.5):
        re, _ = integrate.quad(lambda u: np.cos(t * u) * model.pdf(u), -np.inf, np.inf, limit=400)
        im, _ = integrate.quad(lambda u: np.sin(t * u) * model.pdf(u), -np.inf, np.inf, limit=400)
        assert phi_U(model, t) == pytest.approx(re, abs=1e-8)
        assert abs(im) < 1e-8


@settings(max_examples=50, deadline=None)
@given(t=st.floats(-1e3, 1e3), idx=st.integers(0, 3))
def test_phi_even_and_positive(t, idx):
    m = MODELS[idx]
    assert phi_U(m, -t) == phi_U(m, t)
    assert 0.0 <= phi_U(m, t) <= 1.0


def test_laplace_tail_class():
    m = ErrorModel.laplace(1.0)
    tail = m.tail
    assert (tail.C, tail.alpha) == (0.5, 2.0)
    t = np.linspace(0, 100, 100001)
    assert np.min(phi_U(m, t) * (1 + t) ** tail.alpha) >= tail.C
    assert ErrorModel.degenerate().tail.alpha == 0.0
    assert ErrorModel.gaussian(1.0).tail is None


def test_parse():
    assert ErrorModel.parse("none") == ErrorModel.degenerate()
    assert ErrorModel.parse("laplace:b=0.5") == ErrorModel.laplace(0.5)
    assert ErrorModel.parse("gaussian:sd=2") == ErrorModel.gaussian(2.0)
    m = ErrorModel.parse("laplace:varratio=0.1", var_x=1.0)
    assert m.variance == pytest.approx(0.1, rel=1e-14)
    with pytest.raises(ConfigInvalid):
        ErrorModel.parse("laplace:varratio=0.1")
    with pytest.raises(ConfigInvalid):
        ErrorModel.parse("cauchy:b=1")
    assert ErrorModel.parse(ErrorModel.laplace(0.25).name) == ErrorModel.laplace(0.25)


def test_sample_error(rng):
    assert np.array_equal(sample_error(ErrorModel.degenerate(), 3, rng), np.zeros(3))
    lap = sample_error(ErrorModel.laplace(1.0), 100_000, rng)
    assert np.var(lap) == pytest.approx(2.0, rel=0.05)
    gau = sample_error(ErrorModel.gaussian(1.0), 100_000, rng)
    assert abs(np.mean(gau)) < 0.02


def test_sample_error_deterministic():
    a = sample_error(ErrorModel.laplace(1.0), 50, np.random.default_rng(7))
    b = sample_error(ErrorModel.laplace(1.0), 50, np.random.default_rng(7))
    assert np.array_equal(a, b)


def _replicates(b, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    return ReplicatedSample(np.column_stack([x + rng.laplace(0, b, n), x + rng.laplace(0, b, n)]))


def test_abs_phi_identical_rows():
    rows = np.repeat(np.linspace(-1, 1, 10)[:, None], 2, axis=1)
    np.testing.assert_array_equal(estimate_abs_phi_U(ReplicatedSample(rows), [0.0, 1.0, 5.0]), 1.0)


def test_abs_phi_recovery_at_one():
    est = estimate_abs_phi_U(_replicates(1.0, 5000, 3), [0.0, 1.0])
    assert est[0] == 1.0
    assert est[1] == pytest.approx(0.5, abs=0.05)


def test_abs_phi_range():
    data = _replicates(1.0, 400, 4)
    est = estimate_abs_phi_U(data, np.linspace(0, 20, 200))
    assert np.all(est >= 0) and np.all(est <= 1 + data.n ** -0.5)
    # large t: |phi_U|^2 is ~0, so the floor n^-1/2 is active often
    assert np.min(est) == pytest.approx(data.n ** -0.25)


def test_abs_phi_needs_two_replicates():
    with pytest.raises(InsufficientReplicates):
        estimate_abs_phi_U(ReplicatedSample(np.zeros((5, 1))), [1.0])
