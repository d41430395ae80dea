"""Containers for data and estimated curves, plus their CSV/JSON formats."""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySample, GridMismatch


class MeasurementModel(enum.Enum):
    CLASSICAL = "classical"  # W = X + U (density or regression)
    BERKSON = "berkson"  # X = W + U


@dataclass(frozen=True)
class ContaminatedSample:
    w: np.ndarray
    y: np.ndarray | None = None
    x_true: np.ndarray | None = None
    model: MeasurementModel = MeasurementModel.CLASSICAL

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        if w.size == 0:
            raise EmptySample("sample has no observations")
        object.__setattr__(self, "w", w)
        for name in ("y", "x_true"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float).ravel()
                if v.size != w.size:
                    raise ValueError(f"{name} has length {v.size}, expected {w.size}")
                object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.w.size

    def to_csv(self, path) -> None:
        cols = {"w": self.w}
        if self.y is not None:
            cols["y"] = self.y
        if self.x_true is not None:
            cols["x_true"] = self.x_true
        write_columns(path, cols)

    @classmethod
    def from_csv(cls, path, model: MeasurementModel = MeasurementModel.CLASSICAL):
        cols = read_columns(path)
        if "w" not in cols:
            raise ValueError(f"{path}: missing column 'w'")
        return cls(cols["w"], cols.get("y"), cols.get("x_true"), model)


@dataclass
class CurveMeta:
    estimator: str
    kernel: str = ""
    error: str = ""
    h: float = float("nan")
    n: int = 0
    seed: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class CurveEstimate:
    grid: np.ndarray
    values: np.ndarray
    meta: CurveMeta
    valid: np.ndarray | None = None  # per-point quality flag; None means all valid

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise GridMismatch("grid and values differ in length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")

    def to_csv(self, path) -> None:
        cols = {"x": self.grid, "value": self.values}
        if self.valid is not None and not np.all(self.valid):
            cols["valid"] = self.valid.astype(int)
        write_columns(path, cols)
        meta = asdict(self.meta)
        Path(path).with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "CurveEstimate":
        cols = read_columns(path)
        meta = json.loads(Path(path).with_suffix(".json").read_text())
        valid = cols["valid"].astype(bool) if "valid" in cols else None
        return cls(cols["x"], cols["value"], CurveMeta(**meta), valid)


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_columns(path, cols: dict) -> None:
    names = list(cols)
    arrays = [np.asarray(cols[k]) for k in names]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(names)
        for row in zip(*arrays):
            out.writerow([fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row])


def read_columns(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, j] for j, name in enumerate(header)}
