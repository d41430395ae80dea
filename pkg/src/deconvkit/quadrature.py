"""Fixed composite quadrature on a symmetric interval [-T, T].

Every Fourier integral in the package (kernel inversion, deconvolution
kernels, minimum-contrast coefficients, variance integrals) goes through a
:class:`SymmetricRule`, so estimators that are algebraically equal stay equal
to rounding error when they share a rule.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_NODES = 4097


@dataclass(frozen=True)
class SymmetricRule:
    """Composite Simpson rule with ``n_nodes`` (odd) equispaced nodes on [-T, T].

    The node set contains 0 and is symmetric, so the rule integrates odd
    functions to exactly zero and the cosine ("folded") form of an even
    integrand is the same discrete sum as the full complex form.
    """

    half_width: float
    n_nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.n_nodes < 257 or self.n_nodes % 2 == 0:
            raise ValueError("n_nodes must be odd and >= 257")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.n_nodes - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        m = (self.n_nodes - 1) // 2
        return self.step * np.arange(-m, m + 1, dtype=float)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * (self.step / 3.0)

    @cached_property
    def half_nodes(self) -> np.ndarray:
        """Nonnegative nodes 0, step, ..., T."""
        return self.nodes[(self.n_nodes - 1) // 2:]

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Weights for even integrands: sum(half_weights * f(half_nodes)) == integral over [-T, T]."""
        c = (self.n_nodes - 1) // 2
        w = 2.0 * self.weights[c:]
        w[0] = self.weights[c]
        return w

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def refined(self) -> "SymmetricRule":
        return SymmetricRule(self.half_width, 2 * self.n_nodes - 1)
