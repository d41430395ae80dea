"""Kernels specified through a compactly supported Fourier transform.

Two families are provided:

* ``fp:r=<r>,s=<s>`` with ``phi_K(t) = (1 - |t|^r)^s`` on ``|t| <= 1``
  (r = 2 gives s = 1 biweight-type, s = 2 quartic-type, s = 3 triweight-type
  Fourier inverses);
* ``sinc`` with ``K(x) = sin(pi x) / (pi x)`` whose transform is the
  indicator of ``|t| <= pi``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, UndefinedMoment, UnsupportedKernel
from .quadrature import DEFAULT_NODES, SymmetricRule

_CHUNK = 2 ** 22


class KernelOrder(enum.Enum):
    SECOND = "second"
    INFINITE = "infinite"


@dataclass(frozen=True)
class KernelMoments:
    kappa: float | None
    order: KernelOrder


@dataclass(frozen=True)
class KernelSpec:
    family: str  # "fp" or "sinc"
    r: int = 0
    s: int = 0
    n_quad: int = DEFAULT_NODES

    def __post_init__(self):
        if self.family == "fp":
            if self.r <= 0 or self.r % 2:
                raise ConfigInvalid(f"fp kernel needs a positive even r, got r={self.r}")
            if self.s < 0:
                raise ConfigInvalid(f"fp kernel needs s >= 0, got s={self.s}")
        elif self.family != "sinc":
            raise ConfigInvalid(f"unknown kernel family {self.family!r}")

    @classmethod
    def fourier_polynomial(cls, r: int, s: int, n_quad: int = DEFAULT_NODES) -> "KernelSpec":
        return cls("fp", r, s, n_quad)

    @classmethod
    def sinc(cls, n_quad: int = DEFAULT_NODES) -> "KernelSpec":
        return cls("sinc", n_quad=n_quad)

    @classmethod
    def parse(cls, name: str, n_quad: int = DEFAULT_NODES) -> "KernelSpec":
        """Build a spec from ``"sinc"`` or ``"fp:r=2,s=2"``."""
        name = name.strip().lower()
        if name == "sinc":
            return cls.sinc(n_quad)
        m = re.fullmatch(r"fp:r=(\d+),s=(\d+)", name.replace(" ", ""))
        if m is None:
            raise ConfigInvalid(f"cannot parse kernel name {name!r}")
        return cls.fourier_polynomial(int(m.group(1)), int(m.group(2)), n_quad)

    @property
    def name(self) -> str:
        return "sinc" if self.family == "sinc" else f"fp:r={self.r},s={self.s}"

    @property
    def is_sinc(self) -> bool:
        return self.family == "sinc"

    @property
    def support_phi(self) -> float:
        return np.pi if self.is_sinc else 1.0

    @property
    def rule(self) -> SymmetricRule:
        return SymmetricRule(self.support_phi, self.n_quad)


def eval_phi_K(spec: KernelSpec, t):
    """Fourier transform of the kernel; vectorised over ``t``."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= spec.support_phi
    if spec.is_sinc:
        out = inside.astype(float)
    else:
        base = np.where(inside, 1.0 - np.abs(t) ** spec.r, 0.0)
        out = np.where(inside, base ** spec.s, 0.0)
    return out if out.ndim else float(out)


def eval_phi_K_deriv(spec: KernelSpec, t, order: int):
    """Exact first or second derivative of ``(1 - t^r)^s``.

    Zero for ``|t| > 1``. At ``|t| = 1`` the interior one-sided limit is
    returned; it is 0 whenever ``s > order``.
    """
    if spec.is_sinc:
        raise UnsupportedKernel("phi_L is discontinuous at +-pi; derivatives are undefined")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    r, s = spec.r, spec.s
    if s < order:
        raise UnsupportedKernel(f"{spec.name} is not {order} times differentiable")
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= 1.0
    tt = np.where(inside, t, 0.0)
    base = 1.0 - tt ** r
    if order == 1:
        out = -s * r * tt ** (r - 1) * base ** (s - 1)
    else:
        out = -s * r * (r - 1) * tt ** (r - 2) * base ** (s - 1)
        if s >= 2:
            out = out + s * (s - 1) * r * r * tt ** (2 * r - 2) * base ** (s - 2)
    out = np.where(inside, out, 0.0)
    return out if out.ndim else float(out)


def cosine_transform(rule: SymmetricRule, spectrum: np.ndarray, x) -> np.ndarray:
    """``(1/2pi) * integral cos(t x) spectrum(t) dt`` for an even spectrum on the rule's half nodes."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    coef = rule.half_weights * spectrum / (2.0 * np.pi)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // rule.half_nodes.size)
    for i in range(0, flat.size, step):
        out[i:i + step] = np.cos(np.outer(flat[i:i + step], rule.half_nodes)) @ coef
    return out.reshape(x.shape)


def sine_transform(rule: SymmetricRule, spectrum: np.ndarray, x) -> np.ndarray:
    """``(1/2pi) * integral sin(t x) spectrum(t) dt`` for an odd spectrum on the half nodes."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    coef = rule.half_weights * spectrum / (2.0 * np.pi)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // rule.half_nodes.size)
    for i in range(0, flat.size, step):
        out[i:i + step] = np.sin(np.outer(flat[i:i + step], rule.half_nodes)) @ coef
    return out.reshape(x.shape)


def sinc(x):
    """``sin(pi x)/(pi x)`` with value 1 at 0 and exactly 0 at nonzero integers."""
    x = np.asarray(x, dtype=float)
    out = np.where((x != 0) & (x == np.round(x)), 0.0, np.sinc(x))
    return out if out.ndim else float(out)


def eval_kernel(spec: KernelSpec, x):
    """Kernel value K(x); Fourier inversion by quadrature for the fp family."""
    if spec.is_sinc:
        out = sinc(x)
    else:
        rule = spec.rule
        out = cosine_transform(rule, eval_phi_K(spec, rule.half_nodes), x)
    return out if np.ndim(out) else float(out)


def kernel_moment(spec: KernelSpec) -> KernelMoments:
    """Second moment ``kappa = -phi_K''(0)``."""
    if spec.is_sinc:
        raise UndefinedMoment("the sinc kernel has no finite second moment")
    if spec.s == 0:
        raise UndefinedMoment("s = 0 gives a sinc-type kernel without a second moment")
    if spec.r != 2:
        # phi_K''(0) = 0 for r >= 4: leading bias is not of order h^2
        raise UndefinedMoment(f"{spec.name} has vanishing second moment (higher order kernel)")
    # phi_K(t) = 1 - s t^2 + O(t^4) near 0
    return KernelMoments(kappa=2.0 * spec.s, order=KernelOrder.SECOND)
