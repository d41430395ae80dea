"""Measurement-error distributions with closed-form characteristic functions."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, InsufficientReplicates


@dataclass(frozen=True)
class TailClass:
    """Polynomial lower bound ``|phi_U(t)| >= C (1 + |t|)^(-alpha)``."""

    C: float
    alpha: float


@dataclass(frozen=True)
class ErrorModel:
    family: str  # "laplace", "gaussian" or "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.family not in ("laplace", "gaussian", "none"):
            raise ConfigInvalid(f"unknown error family {self.family!r}")
        if self.family != "none" and not self.scale > 0:
            raise ConfigInvalid(f"{self.family} error needs a positive scale")

    @classmethod
    def laplace(cls, b: float) -> "ErrorModel":
        return cls("laplace", float(b))

    @classmethod
    def gaussian(cls, sd: float) -> "ErrorModel":
        return cls("gaussian", float(sd))

    @classmethod
    def degenerate(cls) -> "ErrorModel":
        return cls("none")

    @classmethod
    def laplace_varratio(cls, ratio: float, var_x: float) -> "ErrorModel":
        """Laplace error with ``var(U) = ratio * var(X)``; var of Laplace(b) is 2 b^2."""
        return cls.laplace(np.sqrt(ratio * var_x / 2.0))

    @classmethod
    def parse(cls, name: str, var_x: float | None = None) -> "ErrorModel":
        """Parse ``none``, ``laplace:b=v``, ``gaussian:sd=v`` or ``laplace:varratio=v``."""
        key = name.strip().lower().replace(" ", "")
        if key == "none":
            return cls.degenerate()
        m = re.fullmatch(r"(laplace|gaussian):(b|sd|varratio)=([0-9.eE+-]+)", key)
        if m is None:
            raise ConfigInvalid(f"cannot parse error model {name!r}")
        fam, param, val = m.group(1), m.group(2), float(m.group(3))
        if param == "varratio":
            if var_x is None:
                raise ConfigInvalid("varratio error models need the variance of X")
            if fam == "laplace":
                return cls.laplace_varratio(val, var_x)
            return cls.gaussian(np.sqrt(val * var_x))
        if (fam, param) not in (("laplace", "b"), ("gaussian", "sd")):
            raise ConfigInvalid(f"parameter {param!r} does not apply to {fam}")
        return cls(fam, val)

    @property
    def name(self) -> str:
        if self.family == "none":
            return "none"
        param = "b" if self.family == "laplace" else "sd"
        return f"{self.family}:{param}={self.scale:.17g}"

    @property
    def variance(self) -> float:
        if self.family == "laplace":
            return 2.0 * self.scale ** 2
        if self.family == "gaussian":
            return self.scale ** 2
        return 0.0

    @property
    def tail(self) -> TailClass | None:
        """Ordinary-smooth tail class, or None for the (supersmooth) Gaussian."""
        if self.family == "none":
            return TailClass(1.0, 0.0)
        if self.family == "laplace":
            # (1+t)^2 / (1 + b^2 t^2) has infimum min(1, b^-2); halve it for margin
            return TailClass(0.5 * min(1.0, self.scale ** -2), 2.0)
        return None

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "laplace":
            return np.exp(-np.abs(u) / self.scale) / (2.0 * self.scale)
        if self.family == "gaussian":
            return np.exp(-0.5 * (u / self.scale) ** 2) / (self.scale * np.sqrt(2 * np.pi))
        raise ValueError("degenerate error has no density")


def phi_U(model: ErrorModel, t):
    """Characteristic function of the error; real and even."""
    t = np.asarray(t, dtype=float)
    if model.family == "laplace":
        out = 1.0 / (1.0 + (model.scale * t) ** 2)
    elif model.family == "gaussian":
        out = np.exp(-0.5 * (model.scale * t) ** 2)
    else:
        out = np.ones_like(t)
    return out if out.ndim else float(out)


def sample_error(model: ErrorModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if model.family == "laplace":
        return rng.laplace(0.0, model.scale, size=n)
    if model.family == "gaussian":
        return rng.normal(0.0, model.scale, size=n)
    return np.zeros(n)


@dataclass(frozen=True)
class ReplicatedSample:
    """Rows of ``m`` repeated measurements ``W^(j) = X + U^(j)``."""

    rows: np.ndarray  # shape (n, m)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise InsufficientReplicates("replicated data must be a 2-d array (n, m)")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return self.rows.shape[1]

    @property
    def n(self) -> int:
        return self.rows.shape[0]


def estimate_abs_phi_U(data: ReplicatedSample, t_grid) -> np.ndarray:
    """Estimate ``|phi_U(t)|`` from the first two replicates.

    ``W1 - W2 = U1 - U2`` has characteristic function ``|phi_U|^2``; its
    empirical version is floored at ``n^(-1/2)`` before the square root.
    """
    if data.m < 2:
        raise InsufficientReplicates(f"need at least 2 replicates per row, got m={data.m}")
    d = data.rows[:, 0] - data.rows[:, 1]
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    dhat = np.array([np.mean(np.cos(ti * d)) for ti in t])
    floor = data.n ** -0.5
    return np.sqrt(np.maximum(dhat, floor))
