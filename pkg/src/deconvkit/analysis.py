"""Asymptotic bias/variance formulas and empirical performance measurement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .curves import ContaminatedSample, CurveEstimate
from .deconv_kernel import DeconvKernelPlan, error_cf
from .density import deconv_kde, kde
from .error_models import ErrorModel
from .errors import ConfigInvalid, GridMismatch, VanishingCharacteristicFunction
from .kernels import KernelSpec, eval_phi_K, kernel_moment
from .quadrature import SymmetricRule

SQRT2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class TrueDensity:
    """Law of X: a Gaussian mixture (a single Gaussian is one component) or a uniform.

    ``components`` holds ``(weight, mean, sd)`` triples; ``bounds`` marks a uniform law.
    """

    components: tuple = ()
    bounds: tuple | None = None

    @classmethod
    def gaussian(cls, mean: float = 0.0, sd: float = 1.0) -> "TrueDensity":
        return cls(((1.0, float(mean), float(sd)),))

    @classmethod
    def mixture(cls, parts: Sequence[tuple[float, float, float]]) -> "TrueDensity":
        total = sum(p[0] for p in parts)
        return cls(tuple((w / total, float(m), float(s)) for w, m, s in parts))

    @classmethod
    def uniform(cls, a: float, b: float) -> "TrueDensity":
        if not b > a:
            raise ConfigInvalid("uniform law needs a < b")
        return cls((), (float(a), float(b)))

    @property
    def name(self) -> str:
        if self.bounds:
            return f"uniform({self.bounds[0]:g},{self.bounds[1]:g})"
        if len(self.components) == 1:
            _, m, s = self.components[0]
            return f"normal({m:g},{s:g})"
        return "mixture(" + ";".join(f"{w:g}*N({m:g},{s:g})" for w, m, s in self.components) + ")"

    @property
    def mean(self) -> float:
        if self.bounds:
            return 0.5 * sum(self.bounds)
        return sum(w * m for w, m, _ in self.components)

    @property
    def variance(self) -> float:
        if self.bounds:
            a, b = self.bounds
            return (b - a) ** 2 / 12.0
        mu = self.mean
        return sum(w * (s * s + (m - mu) ** 2) for w, m, s in self.components)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.bounds:
            a, b = self.bounds
            return np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)
        out = np.zeros_like(x)
        for w, m, s in self.components:
            z = (x - m) / s
            out = out + w * np.exp(-0.5 * z * z) / (s * SQRT2PI)
        return out

    def d2pdf(self, x):
        """Second derivative of the density (zero a.e. for the uniform)."""
        x = np.asarray(x, dtype=float)
        if self.bounds:
            return np.zeros_like(x)
        out = np.zeros_like(x)
        for w, m, s in self.components:
            z = (x - m) / s
            out = out + w * np.exp(-0.5 * z * z) * (z * z - 1.0) / (s ** 3 * SQRT2PI)
        return out

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        if self.bounds:
            a, b = self.bounds
            with np.errstate(invalid="ignore", divide="ignore"):
                val = (np.exp(1j * t * b) - np.exp(1j * t * a)) / (1j * t * (b - a))
            return np.where(t == 0, 1.0 + 0j, val)
        out = np.zeros(t.shape, dtype=complex)
        for w, m, s in self.components:
            out = out + w * np.exp(1j * m * t - 0.5 * (s * t) ** 2)
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.bounds:
            return rng.uniform(self.bounds[0], self.bounds[1], size=n)
        weights = np.array([c[0] for c in self.components])
        idx = rng.choice(len(weights), size=n, p=weights) if len(weights) > 1 else np.zeros(n, int)
        means = np.array([c[1] for c in self.components])[idx]
        sds = np.array([c[2] for c in self.components])[idx]
        return means + sds * rng.standard_normal(n)


@lru_cache(maxsize=4096)
def _fw_point(truth: TrueDensity, error: ErrorModel, x: float) -> float:
    f = lambda u: float(truth.pdf(x - u)) * float(error.pdf(u))
    s = error.scale
    pts = [0.0] + ([x - truth.bounds[0], x - truth.bounds[1]] if truth.bounds else [])
    val, _ = integrate.quad(f, -60 * s, 60 * s, points=sorted(set(pts)), limit=400,
                            epsabs=1e-13, epsrel=1e-11)
    return val


def density_of_w(truth: TrueDensity, error: ErrorModel, x):
    """Density of W = X + U by convolution quadrature (cached per point)."""
    x = np.asarray(x, dtype=float)
    if error.family == "none":
        return truth.pdf(x)
    out = np.array([_fw_point(truth, error, float(v)) for v in x.ravel()]).reshape(x.shape)
    return out if out.ndim else float(out)


def theoretical_bias(truth: TrueDensity, kernel: KernelSpec, h: float, x):
    """Leading bias term ``h^2 kappa f''(x) / 2``."""
    kappa = kernel_moment(kernel).kappa
    out = 0.5 * h * h * kappa * truth.d2pdf(x)
    return out if np.ndim(out) else float(out)


def spectral_weight_integral(kernel: KernelSpec, error, h: float, rule: SymmetricRule | None = None) -> float:
    """``int phi_K(t)^2 |phi_U(t/h)|^{-2} dt`` over the support of phi_K."""
    rule = rule or kernel.rule
    t = rule.half_nodes
    phi = np.abs(error_cf(error, t / h))
    if np.min(phi) < 1e-12:
        raise VanishingCharacteristicFunction("phi_U vanishes on the support of phi_K(.h)")
    return float(np.dot(rule.half_weights, eval_phi_K(kernel, t) ** 2 / phi ** 2))


def theoretical_variance(f_w_at_x: float, kernel: KernelSpec, error, h: float, n: int) -> float:
    """Asymptotic variance ``f_W(x) / (2 pi n h) * int phi_K^2 |phi_U(t/h)|^-2``."""
    if f_w_at_x < 0:
        raise ConfigInvalid("f_W(x) must be nonnegative")
    return f_w_at_x / (2 * np.pi * n * h) * spectral_weight_integral(kernel, error, h)


def theoretical_mse_profile(truth: TrueDensity, kernel: KernelSpec, error, n: int, h_grid, x: float) -> np.ndarray:
    """bias^2 + variance at ``x`` for every bandwidth in ``h_grid``."""
    fw = float(density_of_w(truth, error, x))
    return np.array([theoretical_bias(truth, kernel, h, x) ** 2
                     + theoretical_variance(fw, kernel, error, h, n) for h in h_grid])


def empirical_ise(est: CurveEstimate, truth) -> float:
    """Trapezoid integral of the squared error over the estimate's grid.

    ``truth`` is a TrueDensity or a CurveEstimate on the same grid.
    """
    if est.grid.size < 2:
        raise GridMismatch("need at least two grid points")
    if isinstance(truth, CurveEstimate):
        if truth.grid.shape != est.grid.shape or not np.allclose(truth.grid, est.grid, rtol=0, atol=1e-12):
            raise GridMismatch("estimate and truth are on different grids")
        target = truth.values
    else:
        target = truth.pdf(est.grid)
    return float(integrate.trapezoid((est.values - target) ** 2, est.grid))


def select_bandwidth(h_grid, losses, tie_tol: float = 1e-12) -> tuple[float, float]:
    """Minimiser of ``losses``; ties (within ``tie_tol``) go to the largest h."""
    h_grid = np.asarray(h_grid, dtype=float)
    losses = np.asarray(losses, dtype=float)
    finite = np.isfinite(losses)
    if not finite.any():
        raise ConfigInvalid("no finite loss on the bandwidth grid")
    best = np.min(losses[finite])
    cand = np.flatnonzero(finite & (losses <= best + tie_tol))
    j = cand[np.argmax(h_grid[cand])]
    return float(h_grid[j]), float(losses[j])


def default_h_grid(kernel: KernelSpec, size: int = 30, lo: float = 0.04, hi: float = 2.0) -> np.ndarray:
    """Log-spaced grid scaled by the kernel's frequency support (pi for sinc, 1 for fp)."""
    return kernel.support_phi * np.logspace(np.log10(lo), np.log10(hi), size)


def ise_grid(truth: TrueDensity, size: int = 801, width: float = 8.0) -> np.ndarray:
    """Fixed evaluation grid mean +- width * sd for ISE computations."""
    sd = math.sqrt(truth.variance)
    if truth.bounds:
        a, b = truth.bounds
        pad = 0.5 * (b - a)
        return np.linspace(a - pad, b + pad, size)
    return np.linspace(truth.mean - width * sd, truth.mean + width * sd, size)


def ise_profile(sample: ContaminatedSample, truth: TrueDensity, kind: str, error, h_grid,
                kernel: KernelSpec, grid=None, n_quad: int | None = None) -> np.ndarray:
    grid = ise_grid(truth) if grid is None else np.asarray(grid, dtype=float)
    n_quad = n_quad or kernel.n_quad
    out = []
    for h in h_grid:
        if kind == "deconv_kde":
            est = deconv_kde(sample, DeconvKernelPlan(kernel, error, float(h), n_quad), grid)
        elif kind == "kde":
            est = kde(sample.w, kernel, float(h), grid)
        else:
            raise ConfigInvalid(f"unknown estimator kind {kind!r}")
        out.append(empirical_ise(est, truth))
    return np.array(out)


def oracle_bandwidth(sample: ContaminatedSample, truth: TrueDensity, kind: str, error, h_grid,
                     kernel: KernelSpec, grid=None, n_quad: int | None = None) -> tuple[float, float]:
    """Bandwidth minimising the ISE against the known truth."""
    h_grid = np.asarray(h_grid, dtype=float)
    if h_grid.size < 20:
        raise ConfigInvalid("oracle bandwidth search needs at least 20 bandwidths")
    losses = ise_profile(sample, truth, kind, error, h_grid, kernel, grid, n_quad)
    return select_bandwidth(h_grid, losses)


def log_bias_proxy(truth: TrueDensity, kernel: KernelSpec, h: float) -> float:
    """log of ``(1/2pi) int |phi_X(t)|^2 (phi_K(h t) - 1)^2 dt``.

    By Plancherel this is the integrated squared bias of the error-free
    estimator. Returned on the log scale because for the sinc kernel it
    underflows double precision at moderate h.
    """
    cut = kernel.support_phi / h
    if len(truth.components) == 1 and not truth.bounds:
        sd = truth.components[0][2]
        # int_c^inf exp(-sd^2 t^2) dt = sqrt(pi)/(2 sd) erfc(sd c); log erfc(z) = log 2 + log_ndtr(-z sqrt 2)
        log_tail = math.log(math.sqrt(math.pi) / (2 * sd)) + math.log(2.0) + float(special.log_ndtr(-sd * cut * math.sqrt(2)))
    else:
        tail, _ = integrate.quad(lambda t: float(np.abs(truth.cf(t)) ** 2), cut, np.inf, limit=400)
        log_tail = math.log(tail) if tail > 0 else -math.inf
    # symmetric integrand: (1/2pi) * 2 * int_0^inf
    log_tail += math.log(1.0 / np.pi)
    if kernel.is_sinc:
        return log_tail
    inner, _ = integrate.quad(
        lambda t: float(np.abs(truth.cf(t)) ** 2) * (float(eval_phi_K(kernel, h * t)) - 1.0) ** 2,
        0.0, cut, limit=400, epsabs=0.0, epsrel=1e-12)
    inner /= np.pi
    return math.log(inner + math.exp(log_tail))


@dataclass
class RateExperiment:
    truth: TrueDensity
    error: ErrorModel
    kernel: KernelSpec
    sizes: Sequence[int]
    replicates: int = 20
    seed: int = 0
    h_grid: np.ndarray | None = None
    n_quad: int = 513
    grid_size: int = 801
    bootstrap: int = 200
    threads: int = 1

    def __post_init__(self):
        sizes = list(self.sizes)
        if len(sizes) < 3 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigInvalid("need at least 3 strictly increasing sample sizes")
        if self.replicates < 1:
            raise ConfigInvalid("replicates must be >= 1")


@dataclass
class RateResult:
    sizes: np.ndarray
    ise: np.ndarray  # (len(sizes), replicates) oracle ISE
    h_opt: np.ndarray
    slope: float
    intercept: float
    ci: tuple[float, float]
    failures: dict = field(default_factory=dict)

    @property
    def median(self) -> np.ndarray:
        return np.nanmedian(self.ise, axis=1)

    def table(self) -> dict:
        return {"n": self.sizes, "median_ise": self.median,
                "q25": np.nanpercentile(self.ise, 25, axis=1),
                "q75": np.nanpercentile(self.ise, 75, axis=1),
                "median_h": np.nanmedian(self.h_opt, axis=1)}

    def slope_report(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "ci95": list(self.ci), "sizes": [int(n) for n in self.sizes],
                "replicates": int(self.ise.shape[1]), "failures": len(self.failures)}


def fit_loglog_slope(sizes, values) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(sizes), np.log(values), 1)
    return float(slope), float(intercept)


def rate_experiment(exp: RateExperiment) -> RateResult:
    """Median oracle ISE per sample size and its fitted log-log slope."""
    from .simulation import Scenario, generate, monte_carlo

    h_grid = default_h_grid(exp.kernel) if exp.h_grid is None else np.asarray(exp.h_grid)
    grid = ise_grid(exp.truth, exp.grid_size)
    sizes = np.asarray(exp.sizes)
    ise = np.full((sizes.size, exp.replicates), np.nan)
    hs = np.full_like(ise, np.nan)
    failures = {}

    def task(sample):
        return oracle_bandwidth(sample, exp.truth, "deconv_kde", exp.error, h_grid,
                                exp.kernel, grid, exp.n_quad)

    for i, n in enumerate(sizes):
        scn = Scenario(exp.truth, exp.error, n=int(n), seed=_mix_seed(exp.seed, int(n)))
        mc = monte_carlo(scn, exp.replicates, task, threads=exp.threads)
        for r, res in mc.results.items():
            hs[i, r], ise[i, r] = res
        failures.update({(int(n), r): msg for r, msg in mc.errors.items()})
    med = np.nanmedian(ise, axis=1)
    slope, intercept = fit_loglog_slope(sizes, med)
    rng = np.random.default_rng(np.random.SeedSequence([exp.seed, 0xB007]))
    boots = []
    for _ in range(exp.bootstrap):
        idx = rng.integers(0, exp.replicates, size=(sizes.size, exp.replicates))
        boots.append(fit_loglog_slope(sizes, np.nanmedian(np.take_along_axis(ise, idx, 1), axis=1))[0])
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (slope, slope)
    return RateResult(sizes, ise, hs, slope, intercept, ci, failures)


def _mix_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed, n]).generate_state(1, np.uint64)[0])
