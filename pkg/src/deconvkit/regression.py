"""Local polynomial regression, with and without errors in the covariate.

The error-free estimators fit ``sum_j c_j (x - X_i)^j`` by kernel-weighted
least squares and return ``c_0``. The errors-in-variables versions replace
``((x - X_i)/h)^r K((x - X_i)/h)`` by ``K_{U,r}((x - W_i)/h)`` in the local
moment sums, which is available for p = 0 and p = 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ContaminatedSample, CurveEstimate, CurveMeta, MeasurementModel
from .deconv_kernel import DeconvKernelPlan
from .errors import (ConfigInvalid, EmptyNeighborhood, EmptySample, ModelMismatch,
                     SingularLocalFit, UnsupportedKernel)
from .kernels import KernelSpec, eval_kernel, sinc
from .quadrature import DEFAULT_NODES

MAX_COND = 1e12


@dataclass(frozen=True)
class RegressionConfig:
    p: int
    kernel: KernelSpec
    h: float
    ridge: float = 1e-10  # relative; used only when the plain local system is ill-conditioned

    def __post_init__(self):
        if self.p < 0:
            raise ConfigInvalid("polynomial degree must be >= 0")
        if not self.h > 0:
            raise ConfigInvalid("bandwidth must be positive")
        if self.ridge < 0:
            raise ConfigInvalid("ridge must be nonnegative")


def _weights(kernel: KernelSpec, u: np.ndarray) -> np.ndarray:
    return sinc(u) if kernel.is_sinc else eval_kernel(kernel, u)


def local_linear_from_moments(S0, S1, S2, T0, T1, ridge: float = 1e-10):
    """Closed-form local-linear intercept ``(S2 T0 - S1 T1) / (S0 S2 - S1^2)``.

    Returns ``(value, ok)``. A relative jitter ``ridge * |S0 S2|`` is added to
    the denominator only when it is numerically zero.
    """
    S0, S1, S2, T0, T1 = map(np.asarray, (S0, S1, S2, T0, T1))
    den = S0 * S2 - S1 ** 2
    scale = np.abs(S0 * S2)
    weak = np.abs(den) <= 1e-12 * scale
    den = np.where(weak, den + ridge * scale, den)
    ok = np.isfinite(den) & (den != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(ok, (S2 * T0 - S1 * T1) / np.where(ok, den, 1.0), 0.0)
    return val, ok


def local_fit_weights(u: np.ndarray, y: np.ndarray, k: np.ndarray, p: int, ridge: float = 1e-10):
    """Weighted least-squares coefficients for ``sum_j c_j u^j`` with weights ``k``.

    Raises SingularLocalFit if the (ridged, if needed) normal equations have
    condition number above 1e12.
    """
    powers = np.vander(u, p + 1, increasing=True)
    A = powers.T @ (k[:, None] * powers)
    b = powers.T @ (k * y)
    if np.linalg.cond(A) > MAX_COND:
        A = A + ridge * np.trace(np.abs(A)) / (p + 1) * np.eye(p + 1)
        if not np.isfinite(np.linalg.cond(A)) or np.linalg.cond(A) > MAX_COND:
            raise SingularLocalFit("local design is singular even after ridging")
    return np.linalg.solve(A, b)


def local_constant(x, y, cfg: RegressionConfig, grid, strict: bool = False) -> CurveEstimate:
    """Nadaraya-Watson ratio ``sum Y_i K_i / sum K_i``."""
    if cfg.p != 0:
        raise ConfigInvalid("local_constant needs p = 0")
    x, y, grid = _prepare(x, y, grid)
    vals = np.zeros(grid.size)
    ok = np.ones(grid.size, dtype=bool)
    for j, g in enumerate(grid):
        k = _weights(cfg.kernel, (g - x) / cfg.h)
        den = k.sum()
        if den == 0 or not np.isfinite(den):
            if strict:
                raise EmptyNeighborhood(f"zero kernel mass at x={g}")
            ok[j] = False
            continue
        vals[j] = np.dot(k, y) / den
    return _curve(grid, vals, ok, "local_constant", cfg, x.size)


def local_polynomial(x, y, cfg: RegressionConfig, grid, strict: bool = False) -> CurveEstimate:
    """Local polynomial fit of degree ``cfg.p``; returns the intercept curve."""
    x, y, grid = _prepare(x, y, grid)
    if cfg.p == 0:
        return local_constant(x, y, cfg, grid, strict)
    vals = np.zeros(grid.size)
    ok = np.ones(grid.size, dtype=bool)
    for j, g in enumerate(grid):
        u = (g - x) / cfg.h
        try:
            vals[j] = local_fit_weights(u, y, _weights(cfg.kernel, u), cfg.p, cfg.ridge)[0]
        except (SingularLocalFit, np.linalg.LinAlgError):
            if strict:
                raise SingularLocalFit(f"singular local fit at x={g}")
            ok[j] = False
    return _curve(grid, vals, ok, "local_polynomial", cfg, x.size)


def local_linear_closed_form(x, y, cfg: RegressionConfig, grid) -> CurveEstimate:
    """Local linear estimate from the moment sums S_r and T_r."""
    x, y, grid = _prepare(x, y, grid)
    n, h = x.size, cfg.h
    u = (grid[:, None] - x[None, :]) / h
    k = _weights(cfg.kernel, u)
    S = [(u ** r * k).sum(axis=1) / (n * h) for r in range(3)]
    T = [(u ** r * k) @ y / (n * h) for r in range(2)]
    vals, ok = local_linear_from_moments(*S, *T, ridge=cfg.ridge)
    return _curve(grid, vals, ok, "local_linear", cfg, n)


def deconv_local_polynomial(sample: ContaminatedSample, cfg: RegressionConfig, error, grid,
                            n_quad: int = DEFAULT_NODES, method: str = "fast",
                            strict: bool = False) -> CurveEstimate:
    """Errors-in-variables local constant (p=0) or local linear (p=1) regression."""
    if sample.model is MeasurementModel.BERKSON:
        raise ModelMismatch("no deconvolution regression estimator for Berkson data")
    if sample.y is None:
        raise ConfigInvalid("regression needs responses y")
    if cfg.p not in (0, 1):
        raise ConfigInvalid("deconvolution regression supports p = 0 or 1 only")
    if cfg.kernel.is_sinc and cfg.p >= 1:
        raise UnsupportedKernel("local linear deconvolution needs phi_K derivatives; sinc has none")
    if not cfg.kernel.is_sinc and cfg.kernel.s < cfg.p + 1:
        raise UnsupportedKernel(f"{cfg.kernel.name}: need s >= p + 1")
    grid = np.asarray(grid, dtype=float)
    n, h = sample.n, cfg.h
    base = DeconvKernelPlan(cfg.kernel, error, h, n_quad, 0)

    def sums(r, weights=None):
        plan = base if r == 0 else base.with_r(r)
        f = plan.kernel_sums if method == "fast" else plan.kernel_sums_direct
        return f(grid, sample.w, weights) / (n * h)

    if cfg.p == 0:
        S0, T0 = sums(0), sums(0, sample.y)
        ok = np.isfinite(S0) & (S0 != 0)
        vals = np.where(ok, T0 / np.where(ok, S0, 1.0), 0.0)
    else:
        S = [sums(r) for r in range(3)]
        T = [sums(r, sample.y) for r in range(2)]
        vals, ok = local_linear_from_moments(*S, *T, ridge=cfg.ridge)
    if strict and not ok.all():
        raise SingularLocalFit(f"{np.count_nonzero(~ok)} grid points have a degenerate local fit")
    err_name = getattr(error, "name", "estimated")
    est = _curve(grid, vals, ok, "deconv_local_polynomial", cfg, n)
    est.meta.error = err_name
    return est


def _prepare(x, y, grid):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0:
        raise EmptySample("regression needs at least one pair")
    if x.size != y.size:
        raise ValueError("x and y differ in length")
    return x, y, np.atleast_1d(np.asarray(grid, dtype=float))


def _curve(grid, vals, ok, name, cfg, n):
    meta = CurveMeta(name, cfg.kernel.name, "none", cfg.h, n, extra={"p": cfg.p, "ridge": cfg.ridge})
    return CurveEstimate(grid, vals, meta, None if ok.all() else ok)


def oracle_regression_bandwidth(sample: ContaminatedSample, g, cfg: RegressionConfig, error, h_grid,
                                grid, n_quad: int = DEFAULT_NODES) -> tuple[float, float]:
    """Bandwidth minimising the integrated squared error against a known ``g``.

    Invalid grid points count as a failed fit (infinite loss).
    """
    from dataclasses import replace
    from scipy.integrate import trapezoid
    from .analysis import select_bandwidth

    grid = np.asarray(grid, dtype=float)
    target = g(grid)
    losses = []
    for h in h_grid:
        est = deconv_local_polynomial(sample, replace(cfg, h=float(h)), error, grid, n_quad)
        bad = est.valid is not None and not est.valid.all()
        losses.append(np.inf if bad else trapezoid((est.values - target) ** 2, grid))
    return select_bandwidth(h_grid, losses)
