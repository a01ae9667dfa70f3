"""Tensor grids and compactly supported grid fields v: grid -> C^m."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..sampling import SplitMix64
from ..types import DomainBox

BOUNDARY_ZERO_RTOL = 1e-14


@dataclass(frozen=True)
class Grid:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (len(self.lo) == len(self.hi) == len(self.shape)) or not self.shape:
            raise ValueError("Grid bounds and shape must have the same nonzero length")
        for k, (a, b, s) in enumerate(zip(self.lo, self.hi, self.shape)):
            if not (a < b) or s < 3:
                raise ValueError(f"Grid axis {k} needs lo < hi and >= 3 nodes, got ({a}, {b}, {s})")

    @classmethod
    def uniform(cls, box: DomainBox, nodes: int) -> "Grid":
        return cls(tuple(box.lo), tuple(box.hi), (nodes,) * box.n)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / (s - 1) for a, b, s in zip(self.lo, self.hi, self.shape))

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, s) for a, b, s in zip(self.lo, self.hi, self.shape)]

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape (*shape, n)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def cell_centers(self) -> np.ndarray:
        """Cell midpoints, shape (*(shape - 1), n)."""
        mids = [0.5 * (ax[1:] + ax[:-1]) for ax in self.axes()]
        return np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)

    def to_dict(self) -> dict[str, Any]:
        return {"lo": list(self.lo), "hi": list(self.hi), "shape": list(self.shape)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Grid":
        return cls(
            tuple(map(float, data["lo"])), tuple(map(float, data["hi"])), tuple(map(int, data["shape"]))
        )


def boundary_layer(shape: tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for axis in range(len(shape)):
        idx = [slice(None)] * len(shape)
        idx[axis] = 0
        mask[tuple(idx)] = True
        idx[axis] = -1
        mask[tuple(idx)] = True
    return mask


@dataclass(frozen=True, eq=False)
class TestField:
    grid: Grid
    values: np.ndarray                  # (*grid.shape, m), complex
    support_mask: np.ndarray | None = field(default=None, repr=False)

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == self.grid.n:
            vals = vals[..., None]
        if vals.shape[:-1] != self.grid.shape:
            raise ValueError(f"Values of shape {vals.shape} do not fit grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("Test field values must be finite")
        peak = float(np.max(np.abs(vals))) if vals.size else 0.0
        edge = np.abs(vals[boundary_layer(self.grid.shape)])
        if edge.size and float(np.max(edge)) > BOUNDARY_ZERO_RTOL * max(peak, 1e-300):
            raise ValueError("Test field must vanish on the grid boundary")
        if self.support_mask is not None:
            mask = np.asarray(self.support_mask, dtype=bool)
            if mask.shape != self.grid.shape:
                raise ValueError("support_mask must have the grid shape")
            outside = np.abs(vals[~mask])
            if outside.size and float(np.max(outside)) > BOUNDARY_ZERO_RTOL * max(peak, 1e-300):
                raise ValueError("Test field is nonzero outside its support mask")
            object.__setattr__(self, "support_mask", mask)
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0.0))

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=-1))

    def to_dict(self) -> dict[str, Any]:
        flat = self.values.reshape(-1)
        inter = np.empty(2 * flat.size)
        inter[0::2], inter[1::2] = flat.real, flat.imag
        return {"grid": self.grid.to_dict(), "m": self.m, "values": inter.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TestField":
        grid = Grid.from_dict(data["grid"])
        m = int(data["m"])
        raw = np.asarray(data["values"], dtype=float)
        if raw.size != 2 * grid.size * m:
            raise ValueError(f"Expected {2 * grid.size * m} numbers, got {raw.size}")
        vals = (raw[0::2] + 1j * raw[1::2]).reshape(*grid.shape, m)
        return cls(grid, vals)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TestField":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _bump(r2: np.ndarray) -> np.ndarray:
    """(1 - r^2)^3 on the unit ball, C^2 across its boundary."""
    return np.clip(1.0 - r2, 0.0, None) ** 3


def random_testfield(
    grid: Grid, m: int, gen: SplitMix64, n_bumps: int = 4, real: bool = False
) -> TestField:
    """A seeded superposition of smooth bumps kept two cells away from the grid boundary."""
    pts = grid.mesh()
    lo, hi = np.asarray(grid.lo), np.asarray(grid.hi)
    width = hi - lo
    margin = 2.0 * np.asarray(grid.spacing)
    vals = np.zeros(grid.shape + (m,), dtype=complex)
    for _ in range(n_bumps):
        radius = width * (0.1 + 0.3 * gen.uniform(grid.n))
        radius = np.minimum(radius, 0.5 * width - margin)
        center = lo + margin + radius + gen.uniform(grid.n) * (width - 2.0 * (margin + radius))
        if real:
            coef = gen.normal(m)
        else:
            c = gen.normal(2 * m)
            coef = c[:m] + 1j * c[m:]
        r2 = np.sum(((pts - center) / radius) ** 2, axis=-1)
        vals += _bump(r2)[..., None] * coef
    vals[boundary_layer(grid.shape)] = 0.0
    return TestField(grid, vals)


def to_v(u: np.ndarray, p: float) -> np.ndarray:
    """v = |u|^{(p - 2)/2} u, zero where u vanishes; the last axis holds the components."""
    mag = np.sqrt(np.sum(np.abs(u) ** 2, axis=-1, keepdims=True))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0, mag ** ((p - 2.0) / 2.0), 0.0)
    return scale * u


def to_u(v: np.ndarray, p: float) -> np.ndarray:
    """u = |v|^{(2 - p)/p} v, the inverse of to_v."""
    mag = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1, keepdims=True))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0, mag ** ((2.0 - p) / p), 0.0)
    return scale * v
