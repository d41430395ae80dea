"""Seeded data generation for the classical, regression and Berkson models."""
from __future__ import annotations

import json
import os
from importlib import resources
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .analysis import TrueDensity
from .curves import ContaminatedSample, MeasurementModel
from .error_models import ErrorModel, ReplicatedSample, sample_error
from .errors import ConfigInvalid

ROLES = {"X": 1, "U": 2, "V": 3, "U2": 4}

REGRESSION_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "square": lambda x: x ** 2,
    "linear": lambda x: 2.0 * x + 1.0,
    "sine": lambda x: np.sin(np.pi * x),
    "cubic": lambda x: x ** 3 - x,
}


@dataclass(frozen=True)
class Scenario:
    truth: TrueDensity  # law of X (classical models) or of W (Berkson)
    error: ErrorModel
    n: int
    model: str = "density"  # density | regression | berkson
    regression_g: str | None = None
    v_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("density", "regression", "berkson"):
            raise ConfigInvalid(f"unknown model {self.model!r}")
        if self.n < 1:
            raise ConfigInvalid("n must be positive")
        has_g = self.regression_g is not None
        if has_g != (self.model != "density"):
            raise ConfigInvalid("regression_g is required for regression/berkson and forbidden for density")
        if has_g and self.regression_g not in REGRESSION_FUNCTIONS:
            raise ConfigInvalid(f"unknown regression function {self.regression_g!r}")
        if self.v_noise < 0:
            raise ConfigInvalid("v_noise must be nonnegative")

    def g(self, x):
        return REGRESSION_FUNCTIONS[self.regression_g](np.asarray(x, dtype=float))


def stream(seed: int, role: str, replicate: int | None = None) -> np.random.Generator:
    """Independent counter-based (Philox) stream for one (seed, replicate, role)."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, ROLES[role]]
    if replicate is not None:
        key.append(int(replicate))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def replicate_seed(seed: int, r: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, 0x5EED, r]).generate_state(1, np.uint64)[0])


def generate(scn: Scenario) -> ContaminatedSample:
    """Draw one sample. X, U and V come from separate streams, so they are independent."""
    n = scn.n
    if scn.model == "berkson":
        w = scn.truth.sample(n, stream(scn.seed, "X"))
        x = w + sample_error(scn.error, n, stream(scn.seed, "U"))
        y = scn.g(x) + scn.v_noise * stream(scn.seed, "V").standard_normal(n)
        return ContaminatedSample(w, y, x, MeasurementModel.BERKSON)
    x = scn.truth.sample(n, stream(scn.seed, "X"))
    w = x + sample_error(scn.error, n, stream(scn.seed, "U"))
    y = None
    if scn.model == "regression":
        y = scn.g(x) + scn.v_noise * stream(scn.seed, "V").standard_normal(n)
    return ContaminatedSample(w, y, x, MeasurementModel.CLASSICAL)


def generate_replicates(scn: Scenario, m: int = 2) -> ReplicatedSample:
    """Rows ``(X + U^(1), ..., X + U^(m))`` sharing one X per row."""
    if m < 1:
        raise ConfigInvalid("m must be >= 1")
    x = scn.truth.sample(scn.n, stream(scn.seed, "X"))
    cols = [x + sample_error(scn.error, scn.n, stream(scn.seed, "U", j)) for j in range(m)]
    return ReplicatedSample(np.column_stack(cols))


@dataclass
class MonteCarloResult:
    results: dict[int, Any] = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)

    def values(self) -> np.ndarray:
        return np.array([self.results[r] for r in sorted(self.results)], dtype=float)

    def mean(self):
        return self.values().mean(axis=0)

    def median(self):
        return np.median(self.values(), axis=0)

    def quantile(self, q):
        return np.quantile(self.values(), q, axis=0)

    def standard_error(self):
        v = self.values()
        return v.std(axis=0, ddof=1) / np.sqrt(v.shape[0])


def resolve_threads(threads: int | None = None) -> int:
    if threads:
        return max(1, int(threads))
    return max(1, int(os.environ.get("DECONV_THREADS", "1") or 1))


def monte_carlo(template: Scenario, R: int, task: Callable[[ContaminatedSample], Any],
                threads: int | None = None) -> MonteCarloResult:
    """Run ``task`` on R independent samples; replicate r is seeded from (seed, r).

    Failures are recorded per replicate rather than raised.
    """
    if R < 1:
        raise ConfigInvalid("R must be >= 1")

    def one(r):
        scn = replace(template, seed=replicate_seed(template.seed, r))
        try:
            return r, task(generate(scn)), None
        except Exception as exc:  # recorded, not fatal
            return r, None, f"{type(exc).__name__}: {exc}"

    n_threads = resolve_threads(threads)
    if n_threads == 1:
        outcomes = [one(r) for r in range(R)]
    else:
        with ThreadPoolExecutor(n_threads) as pool:
            outcomes = list(pool.map(one, range(R)))
    out = MonteCarloResult()
    for r, val, err in sorted(outcomes, key=lambda o: o[0]):
        if err is None:
            out.results[r] = val
        else:
            out.errors[r] = err
    return out


def truth_from_dict(d: dict) -> TrueDensity:
    fam = d.get("family")
    if fam == "gaussian":
        return TrueDensity.gaussian(d.get("mean", 0.0), d.get("sd", 1.0))
    if fam == "uniform":
        return TrueDensity.uniform(d["a"], d["b"])
    if fam == "mixture":
        return TrueDensity.mixture([tuple(c) for c in d["components"]])
    raise ConfigInvalid(f"unknown truth family {fam!r}")


def scenario_from_dict(d: dict, n: int | None = None, seed: int = 0) -> Scenario:
    """Scenario from a plain mapping (truth, error, n, model, regression_g, v_noise)."""
    unknown = set(d) - {"truth", "error", "n", "model", "regression_g", "v_noise"}
    if unknown:
        raise ConfigInvalid(f"unknown scenario keys {sorted(unknown)}")
    truth = truth_from_dict(d["truth"])
    error = ErrorModel.parse(d.get("error", "none"), truth.variance)
    return Scenario(truth, error, int(n or d.get("n", 100)), model=d.get("model", "density"),
                    regression_g=d.get("regression_g"), v_noise=float(d.get("v_noise", 0.0)), seed=seed)


def load_presets(path=None) -> dict:
    """Preset table from a JSON file; the bundled table by default."""
    if path is None:
        text = resources.files("deconvkit").joinpath("presets.json").read_text()
    else:
        text = open(path).read()
    return json.loads(text)


PRESETS = tuple(load_presets())


def preset(name: str, n: int | None = None, seed: int = 0) -> Scenario:
    """Named scenario. ``fig31``: X ~ N(0,1), Laplace error with var(U)/var(X) = 0.1."""
    table = load_presets()
    if name not in table:
        raise ConfigInvalid(f"unknown preset {name!r}; choose from {', '.join(table)}")
    return scenario_from_dict(table[name], n, seed)
