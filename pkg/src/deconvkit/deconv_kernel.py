"""Deconvolution kernels K_U and their derivative-weighted versions K_{U,r}.

For a symmetric kernel and symmetric error,

    K_{U,r}(x) = (1 / 2 pi i^r) * int exp(-i t x) phi_K^{(r)}(t) / phi_U(t/h) dt

reduces to a real cosine integral for even r and a sine integral for odd r.
All integrals use the plan's :class:`SymmetricRule` on the support of phi_K.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .error_models import ErrorModel, ReplicatedSample, estimate_abs_phi_U, phi_U
from .errors import ConfigInvalid, UnsupportedKernel, VanishingCharacteristicFunction
from .kernels import (KernelSpec, cosine_transform, eval_phi_K, eval_phi_K_deriv,
                      sine_transform)
from .quadrature import DEFAULT_NODES, SymmetricRule

PHI_FLOOR = 1e-12
WEIGHT_WARN = 1e8
_CHUNK = 2 ** 22


@dataclass(frozen=True)
class EstimatedErrorCF:
    """Plug-in ``|phi_U|`` estimated from replicated measurements."""

    data: ReplicatedSample

    @property
    def name(self) -> str:
        return f"replicates:n={self.data.n},m={self.data.m}"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return estimate_abs_phi_U(self.data, t.ravel()).reshape(t.shape)


def error_cf(error, t):
    """Evaluate a known ErrorModel cf or an estimated one."""
    if isinstance(error, ErrorModel):
        return np.asarray(phi_U(error, t), dtype=float)
    return np.asarray(error(t), dtype=float)


@dataclass(frozen=True)
class DeconvKernelPlan:
    kernel: KernelSpec
    error: ErrorModel | EstimatedErrorCF
    h: float
    n_quad: int = DEFAULT_NODES
    r: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigInvalid("bandwidth h must be positive")
        if self.r not in (0, 1, 2):
            raise ConfigInvalid("derivative order r must be 0, 1 or 2")
        if self.r and self.kernel.is_sinc:
            raise UnsupportedKernel("K_{U,r} with r >= 1 needs a differentiable phi_K; sinc is not")
        if self.r and self.kernel.s < self.r:
            raise UnsupportedKernel(f"{self.kernel.name} has no derivative of order {self.r}")
        phi = error_cf(self.error, self.rule.half_nodes / self.h)
        if np.min(np.abs(phi)) < PHI_FLOOR:
            raise VanishingCharacteristicFunction(
                f"|phi_U(t/h)| < {PHI_FLOOR} on the quadrature nodes (h={self.h})")
        if np.max(np.abs(self.spectrum)) > WEIGHT_WARN:
            warnings.warn(f"deconvolution weights exceed {WEIGHT_WARN:g}; variance blow-up regime",
                          RuntimeWarning, stacklevel=2)

    @cached_property
    def rule(self) -> SymmetricRule:
        return SymmetricRule(self.kernel.support_phi, self.n_quad)

    def with_r(self, r: int) -> "DeconvKernelPlan":
        return DeconvKernelPlan(self.kernel, self.error, self.h, self.n_quad, r)

    def phi_K_r(self, t):
        if self.r == 0:
            return np.asarray(eval_phi_K(self.kernel, t), dtype=float)
        return np.asarray(eval_phi_K_deriv(self.kernel, t, self.r), dtype=float)

    @cached_property
    def spectrum(self) -> np.ndarray:
        """``phi_K^{(r)}(t) / phi_U(t/h)`` on the rule's nonnegative nodes."""
        t = self.rule.half_nodes
        return self.phi_K_r(t) / error_cf(self.error, t / self.h)

    @property
    def error_name(self) -> str:
        return self.error.name

    def __call__(self, x):
        """K_{U,r}(x) by direct quadrature (reference path)."""
        if self.r == 1:
            out = -sine_transform(self.rule, self.spectrum, x)
        elif self.r == 2:
            out = -cosine_transform(self.rule, self.spectrum, x)
        else:
            out = cosine_transform(self.rule, self.spectrum, x)
        return out if np.ndim(out) else float(out)

    def complex_value(self, x) -> np.ndarray:
        """Full complex quadrature over [-T, T], without using symmetry."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = self.rule.nodes
        g = self.rule.weights * self.phi_K_r(t) / error_cf(self.error, t / self.h)
        vals = np.exp(-1j * np.outer(x, t)) @ g
        return vals / (2.0 * np.pi * (1j ** self.r))

    def kernel_sums(self, x, w, weights=None) -> np.ndarray:
        """``sum_j weights_j K_{U,r}((x - w_j)/h)`` for every x (fast path).

        Expands cos/sin of the difference so the cost is O((n + len(x)) * nodes)
        instead of O(n * len(x) * nodes).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = np.asarray(w, dtype=float)
        c = np.ones_like(w) if weights is None else np.asarray(weights, dtype=float)
        freq = self.rule.half_nodes / self.h
        C = np.zeros(freq.size)
        S = np.zeros(freq.size)
        step = max(1, _CHUNK // freq.size)
        for i in range(0, w.size, step):
            arg = np.outer(freq, w[i:i + step])
            C += np.cos(arg) @ c[i:i + step]
            S += np.sin(arg) @ c[i:i + step]
        coef = self.rule.half_weights * self.spectrum / (2.0 * np.pi)
        out = np.empty(x.size)
        step = max(1, _CHUNK // freq.size)
        for i in range(0, x.size, step):
            arg = np.outer(x[i:i + step], freq)
            cx, sx = np.cos(arg), np.sin(arg)
            if self.r % 2:
                # sum_j sin(t (x - w_j)/h) = sin(tx/h) C - cos(tx/h) S
                out[i:i + step] = -((sx * C - cx * S) @ coef)
            else:
                sign = -1.0 if self.r == 2 else 1.0
                out[i:i + step] = sign * ((cx * C + sx * S) @ coef)
        return out

    def kernel_sums_direct(self, x, w, weights=None) -> np.ndarray:
        """Reference path: evaluate K_{U,r} at every (x_i - w_j)/h and sum in index order."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = np.asarray(w, dtype=float)
        c = np.ones_like(w) if weights is None else np.asarray(weights, dtype=float)
        return np.array([np.dot(self((xi - w) / self.h), c) for xi in x])


def eval_KU(plan: DeconvKernelPlan, x):
    if plan.r != 0:
        raise ConfigInvalid("eval_KU needs a plan with r = 0; use eval_KUr")
    return plan(x)


def eval_KUr(plan: DeconvKernelPlan, x):
    if plan.r < 1:
        raise ConfigInvalid("eval_KUr needs a plan with r >= 1")
    return plan(x)


def realness_residual(plan: DeconvKernelPlan, x_grid) -> float:
    """Largest imaginary part of the complex-form quadrature over ``x_grid``."""
    return float(np.max(np.abs(plan.complex_value(x_grid).imag)))
