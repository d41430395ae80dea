import json
from dataclasses import replace

import numpy as np
import pytest

from deconvkit.analysis import TrueDensity
from deconvkit.curves import ContaminatedSample, MeasurementModel
from deconvkit.error_models import ErrorModel
from deconvkit.errors import ConfigInvalid
from deconvkit.simulation import (PRESETS, Scenario, generate, generate_replicates, load_presets,
                                  monte_carlo, preset, replicate_seed, resolve_threads,
                                  scenario_from_dict, stream)

NORMAL = TrueDensity.gaussian()


def test_degenerate_error_gives_w_equal_x():
    s = generate(Scenario(NORMAL, ErrorModel.degenerate(), 50, seed=1))
    np.testing.assert_array_equal(s.w, s.x_true)


def test_variance_of_w():
    s = generate(preset("fig31", n=100_000, seed=2))
    assert np.var(s.w) == pytest.approx(1.1, rel=0.03)


def test_same_seed_bitwise_identical():
    a = generate(preset("regression-square", seed=9))
    b = generate(preset("regression-square", seed=9))
    assert a.w.tobytes() == b.w.tobytes() and a.y.tobytes() == b.y.tobytes()
    c = generate(preset("regression-square", seed=10))
    assert not np.array_equal(a.w, c.w)


def test_x_and_u_uncorrelated():
    s = generate(preset("fig31", n=100_000, seed=3))
    u = s.w - s.x_true
    assert abs(np.corrcoef(s.x_true, u)[0, 1]) <= 0.01


def test_regression_and_berkson_structure():
    scn = preset("regression-square", n=1000, seed=4)
    s = generate(scn)
    assert s.model is MeasurementModel.CLASSICAL
    np.testing.assert_allclose(np.std(s.y - s.x_true ** 2), 0.1, rtol=0.1)
    b = generate(replace(scn, model="berkson"))
    assert b.model is MeasurementModel.BERKSON
    assert np.all(np.abs(b.w) <= 1.0)  # W carries the uniform law under Berkson
    assert np.var(b.x_true - b.w) == pytest.approx(scn.error.variance, rel=0.15)


def test_streams_are_independent_by_role():
    a = stream(5, "X").standard_normal(4)
    b = stream(5, "U").standard_normal(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, stream(5, "X").standard_normal(4))
    assert replicate_seed(5, 0) != replicate_seed(5, 1)


def test_scenario_validation():
    with pytest.raises(ConfigInvalid):
        Scenario(NORMAL, ErrorModel.degenerate(), 10, model="density", regression_g="square")
    with pytest.raises(ConfigInvalid):
        Scenario(NORMAL, ErrorModel.degenerate(), 10, model="regression")
    with pytest.raises(ConfigInvalid):
        Scenario(NORMAL, ErrorModel.degenerate(), 0)
    with pytest.raises(ConfigInvalid):
        Scenario(NORMAL, ErrorModel.degenerate(), 10, model="mystery")
    with pytest.raises(ConfigInvalid):
        preset("nope")


def test_replicates_share_x():
    rep = generate_replicates(preset("fig31", n=2000, seed=6), m=3)
    assert rep.m == 3 and rep.n == 2000
    d = rep.rows[:, 0] - rep.rows[:, 1]
    # difference of two independent Laplace(b) draws has variance 4 b^2
    assert np.var(d) == pytest.approx(4 * preset("fig31").error.scale ** 2, rel=0.1)


def test_monte_carlo_single_replicate_matches_direct():
    scn = preset("fig31", n=30, seed=7)
    mc = monte_carlo(scn, 1, lambda s: float(np.mean(s.w)))
    direct = float(np.mean(generate(replace(scn, seed=replicate_seed(7, 0))).w))
    assert mc.results == {0: direct}


def test_monte_carlo_mean_symmetry():
    mc = monte_carlo(preset("fig31", n=200, seed=8), 100, lambda s: float(np.mean(s.w)))
    assert abs(mc.mean()) <= 3 * mc.standard_error()


def test_monte_carlo_records_failures_and_is_thread_invariant():
    def task(s):
        if s.w[0] > 0:
            raise ValueError("boom")
        return float(s.w.sum())

    scn = preset("fig31", n=10, seed=9)
    one = monte_carlo(scn, 20, task, threads=1)
    four = monte_carlo(scn, 20, task, threads=4)
    assert one.results == four.results and one.errors == four.errors
    assert one.errors and all("boom" in e for e in one.errors.values())
    assert len(one.results) + len(one.errors) == 20


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("DECONV_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.delenv("DECONV_THREADS")
    assert resolve_threads(None) == 1


def test_presets_from_file(tmp_path):
    assert set(PRESETS) >= {"fig31", "fig31-noerror", "regression-square"}
    table = {"mix": {"truth": {"family": "mixture", "components": [[0.5, -1, 0.5], [0.5, 1, 0.5]]},
                     "error": "gaussian:sd=0.2", "n": 40}}
    path = tmp_path / "presets.json"
    path.write_text(json.dumps(table))
    scn = scenario_from_dict(load_presets(path)["mix"], seed=1)
    assert scn.n == 40 and scn.error.family == "gaussian"
    assert generate(scn).n == 40
    with pytest.raises(ConfigInvalid):
        scenario_from_dict({"truth": {"family": "gaussian"}, "bogus": 1})


def test_sample_csv_round_trip(tmp_path):
    s = generate(preset("regression-square", n=25, seed=11))
    s.to_csv(tmp_path / "s.csv")
    back = ContaminatedSample.from_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.w, s.w)
    np.testing.assert_array_equal(back.y, s.y)
    np.testing.assert_array_equal(back.x_true, s.x_true)
