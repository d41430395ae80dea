"""Kernel density estimation from exact and from error-contaminated data."""
from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from .curves import ContaminatedSample, CurveEstimate, CurveMeta, MeasurementModel
from .deconv_kernel import DeconvKernelPlan
from .error_models import ErrorModel
from .errors import ConfigInvalid, EmptySample, ModelMismatch
from .kernels import KernelSpec, sinc

DEFAULT_GRID_SIZE = 512


def default_grid(w, h: float, size: int = DEFAULT_GRID_SIZE, margin: float = 3.0) -> np.ndarray:
    """Equispaced grid on [min w - margin*h*sd, max w + margin*h*sd]."""
    w = np.asarray(w, dtype=float)
    sd = float(np.std(w)) or 1.0
    pad = margin * h * sd
    return np.linspace(w.min() - pad, w.max() + pad, size)


def kde(x_data, kernel: KernelSpec, h: float, grid) -> CurveEstimate:
    """Standard estimator ``(1/nh) sum_i K((x - X_i)/h)``."""
    x_data = np.asarray(x_data, dtype=float).ravel()
    if x_data.size == 0:
        raise EmptySample("kde needs at least one observation")
    if not h > 0:
        raise ConfigInvalid("bandwidth must be positive")
    grid = np.asarray(grid, dtype=float)
    if kernel.is_sinc:
        vals = np.array([np.sum(sinc((g - x_data) / h)) for g in grid])
    else:
        plan = DeconvKernelPlan(kernel, ErrorModel.degenerate(), h, n_quad=kernel.n_quad)
        vals = plan.kernel_sums(grid, x_data)
    meta = CurveMeta("kde", kernel.name, "none", h, x_data.size)
    return CurveEstimate(grid, vals / (x_data.size * h), meta)


def deconv_kde(sample: ContaminatedSample, plan: DeconvKernelPlan, grid,
               method: str = "fast", truncate: bool = False) -> CurveEstimate:
    """Deconvolution estimator ``(1/nh) sum_i K_U((x - W_i)/h)``.

    Negative values are kept unless ``truncate`` is set, in which case the
    positive part is renormalised to unit mass over the grid.
    """
    if sample.model is MeasurementModel.BERKSON:
        raise ModelMismatch("no density deconvolution estimator for Berkson data")
    if plan.r != 0:
        raise ConfigInvalid("deconv_kde needs a plan with r = 0")
    grid = np.asarray(grid, dtype=float)
    if method == "fast":
        sums = plan.kernel_sums(grid, sample.w)
    elif method == "direct":
        sums = plan.kernel_sums_direct(grid, sample.w)
    else:
        raise ConfigInvalid(f"unknown evaluation method {method!r}")
    meta = CurveMeta("deconv_kde", plan.kernel.name, plan.error_name, plan.h, sample.n)
    est = CurveEstimate(grid, sums / (sample.n * plan.h), meta)
    return truncate_renormalize(est) if truncate else est


def integrate_estimate(est: CurveEstimate) -> float:
    return float(trapezoid(est.values, est.grid)) if est.grid.size > 1 else 0.0


def truncate_renormalize(est: CurveEstimate) -> CurveEstimate:
    pos = np.clip(est.values, 0.0, None)
    mass = float(trapezoid(pos, est.grid))
    vals = pos / mass if mass > 0 else pos
    meta = CurveMeta(**{**est.meta.__dict__, "extra": {**est.meta.extra, "truncated": True}})
    return CurveEstimate(est.grid.copy(), vals, meta, est.valid)
