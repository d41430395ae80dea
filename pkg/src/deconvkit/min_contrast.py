"""Minimum-contrast (penalised contrast) density deconvolution on a sinc basis.

    f~(x) = sum_{|k| <= k0} a_k * sqrt(l) * L(l x - k)

with ``L`` the sinc kernel and coefficients ``a_k`` obtained from the
empirical characteristic function of W divided by phi_U. With bandwidth
``h = 1/l`` the estimator agrees exactly with the sinc-kernel deconvolution
estimator at every grid point ``k/l`` with ``|k| <= k0`` and vanishes at grid
points beyond ``k0/l``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import ContaminatedSample, CurveEstimate, CurveMeta, MeasurementModel
from .deconv_kernel import DeconvKernelPlan, error_cf
from .density import deconv_kde
from .errors import ConfigInvalid, IndexOutOfRange, ModelMismatch
from .kernels import KernelSpec, eval_phi_K, sinc
from .quadrature import DEFAULT_NODES

_CHUNK = 2 ** 22


@dataclass(frozen=True)
class PceConfig:
    ell: float
    k0: int = 255
    n_quad: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.ell > 0:
            raise ConfigInvalid("ell must be positive")
        if self.k0 < 1:
            raise ConfigInvalid("k0 must be a positive integer")

    @classmethod
    def from_m(cls, m: int, ell: float, n_quad: int = DEFAULT_NODES) -> "PceConfig":
        """``k0 = 2^m - 1``."""
        return cls(ell, 2 ** m - 1, n_quad)

    @classmethod
    def from_bandwidth(cls, h: float, k0: int = 255, n_quad: int = DEFAULT_NODES) -> "PceConfig":
        return cls(1.0 / h, k0, n_quad)

    @property
    def h(self) -> float:
        return 1.0 / self.ell

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.k0, self.k0 + 1)

    def sinc_plan(self, error) -> DeconvKernelPlan:
        """Sinc deconvolution plan at ``h = 1/ell``; its rule is the one a_k must use."""
        return DeconvKernelPlan(KernelSpec.sinc(self.n_quad), error, self.h, self.n_quad)


@dataclass
class PceEstimate:
    a_hat: np.ndarray  # index k + k0
    config: PceConfig
    curve: CurveEstimate
    imag_residual: float = 0.0

    def coefficient(self, k: int) -> float:
        if abs(k) > self.config.k0:
            raise IndexOutOfRange(f"|k|={abs(k)} exceeds k0={self.config.k0}")
        return float(self.a_hat[k + self.config.k0])

    def to_csv(self, curve_path, coef_path) -> None:
        from .curves import write_columns
        self.curve.to_csv(curve_path)
        write_columns(coef_path, {"k": self.config.ks, "a_hat": self.a_hat})


def _coefficients(sample: ContaminatedSample, error, cfg: PceConfig, ks) -> tuple[np.ndarray, float]:
    """a_k for each k in ``ks`` and the largest imaginary residual.

    After substituting t = l u the integral runs over u in [-pi, pi]:
        a_k = sqrt(l)/(2 pi n) sum_j int exp(-i u (k - l W_j)) phi_L(u)/phi_U(l u) du
    """
    if sample.model is MeasurementModel.BERKSON:
        raise ModelMismatch("minimum contrast estimator is for the classical model only")
    ell, n = cfg.ell, sample.n
    rule = cfg.sinc_plan(error).rule
    u = rule.nodes
    g = rule.weights * eval_phi_K(KernelSpec.sinc(), u) / error_cf(error, ell * u)
    ecf = np.zeros(u.size, dtype=complex)
    step = max(1, _CHUNK // u.size)
    for i in range(0, n, step):
        ecf += np.exp(1j * np.outer(u, ell * sample.w[i:i + step])).sum(axis=1)
    ks = np.asarray(ks, dtype=float)
    vals = np.exp(-1j * np.outer(ks, u)) @ (g * ecf)
    vals *= np.sqrt(ell) / (2.0 * np.pi * n)
    return vals.real, float(np.max(np.abs(vals.imag))) if vals.size else 0.0


def a_hat(sample: ContaminatedSample, error, cfg: PceConfig, k: int) -> float:
    if abs(k) > cfg.k0:
        raise IndexOutOfRange(f"|k|={abs(k)} exceeds k0={cfg.k0}")
    return float(_coefficients(sample, error, cfg, [k])[0][0])


def pce_values(a: np.ndarray, cfg: PceConfig, x) -> np.ndarray:
    """``sum_k a_k sqrt(l) L(l x - k)`` at arbitrary points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ks = cfg.ks.astype(float)
    out = np.empty(x.size)
    step = max(1, _CHUNK // ks.size)
    for i in range(0, x.size, step):
        out[i:i + step] = sinc(cfg.ell * x[i:i + step, None] - ks[None, :]) @ a
    return out * np.sqrt(cfg.ell)


def pce_at_index(a: np.ndarray, cfg: PceConfig, s) -> np.ndarray:
    """f~(s/l) for integer ``s``; arguments ``s - k`` are formed in integer arithmetic."""
    s = np.atleast_1d(np.asarray(s, dtype=np.int64))
    return (sinc((s[:, None] - cfg.ks[None, :]).astype(float)) @ a) * np.sqrt(cfg.ell)


def pce_estimate(sample: ContaminatedSample, error, cfg: PceConfig, grid) -> PceEstimate:
    grid = np.asarray(grid, dtype=float)
    if grid.size and cfg.k0 / cfg.ell < np.max(np.abs(grid)):
        warnings.warn(f"k0/ell = {cfg.k0 / cfg.ell:g} is inside the grid range; "
                      "the estimate is forced towards 0 beyond it", RuntimeWarning, stacklevel=2)
    a, imag = _coefficients(sample, error, cfg, cfg.ks)
    meta = CurveMeta("pce", "sinc", getattr(error, "name", "estimated"), cfg.h, sample.n,
                     extra={"k0": cfg.k0, "ell": cfg.ell})
    curve = CurveEstimate(grid, pce_values(a, cfg, grid), meta)
    return PceEstimate(a, cfg, curve, imag)


def sinc_interpolate(values_at_k: np.ndarray, ks: np.ndarray, ell: float, x) -> np.ndarray:
    """``sum_k L(l x - k) v_k``: the interpolation of grid values by the sinc basis."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return sinc(ell * x[:, None] - np.asarray(ks, dtype=float)[None, :]) @ values_at_k


@dataclass
class TheoremReport:
    inside_max: float
    outside_max: float
    n_inside: int
    n_outside: int
    tol: float = 1e-8
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.inside_max <= self.tol and self.outside_max <= self.tol

    def as_dict(self) -> dict:
        return {"inside_max_abs_diff": self.inside_max, "outside_max_abs": self.outside_max,
                "n_inside": self.n_inside, "n_outside": self.n_outside, "tol": self.tol,
                "status": "PASS" if self.passed else "FAIL", **self.details}


def verify_theorem(sample: ContaminatedSample, error, cfg: PceConfig, probe_ks,
                   tol: float = 1e-8) -> TheoremReport:
    """Compare f~(k/l) with the sinc deconvolution estimator (h = 1/l) at integer k."""
    probe = np.asarray(sorted(set(int(k) for k in probe_ks)), dtype=np.int64)
    inside = probe[np.abs(probe) <= cfg.k0]
    outside = probe[np.abs(probe) > cfg.k0]
    if inside.size == 0 or outside.size == 0:
        raise ConfigInvalid("probe set must contain k inside and outside [-k0, k0]")
    a, imag = _coefficients(sample, error, cfg, cfg.ks)
    tilde_in = pce_at_index(a, cfg, inside)
    decon_in = deconv_kde(sample, cfg.sinc_plan(error), inside / cfg.ell).values
    tilde_out = pce_at_index(a, cfg, outside)
    return TheoremReport(
        inside_max=float(np.max(np.abs(tilde_in - decon_in))),
        outside_max=float(np.max(np.abs(tilde_out))),
        n_inside=int(inside.size), n_outside=int(outside.size), tol=tol,
        details={"k0": cfg.k0, "ell": cfg.ell, "n": sample.n, "coef_imag_residual": imag})
