"""
The X/Y decomposition of a plane vector field v on {v != 0}:

    X1 = |v|^-1 (v1 d1|v| + v2 d2|v|)      X2 = |v|^-1 (v2 d1|v| - v1 d2|v|)
    Y1 = div v - X1                         Y2 = (d1 v2 - d2 v1) - X2

with sum_j |grad v_j|^2 = X1^2 + X2^2 + Y1^2 + Y2^2 pointwise and
int X1 Y1 + X2 Y2 = int det grad v = 0 for compactly supported v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..logging import get_logger
from .functional import EPS_SUPP, CellData, cell_data
from .testfield import Grid, TestField

logger = get_logger(__name__)

GradientMode = Literal["identity", "difference"]


@dataclass(frozen=True, eq=False)
class XYDecomposition:
    X1: np.ndarray
    X2: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    mask: np.ndarray          # cells where |v| exceeds the support threshold
    dirichlet: np.ndarray     # sum_j |grad v_j|^2
    weight: float


@dataclass(frozen=True)
class IdentityReport:
    rel_xy: float             # max |sum |grad v_j|^2 - (X^2 + Y^2)| / max sum |grad v_j|^2
    magic: float              # |int X1 Y1 + X2 Y2| / int sum |grad v_j|^2
    mode: str
    cells: int

    def to_dict(self) -> dict[str, object]:
        return {"rel_xy": self.rel_xy, "magic": self.magic, "mode": self.mode, "cells": self.cells}


def _magnitude_gradient(v: TestField, cells: CellData, mode: GradientMode) -> np.ndarray:
    if mode == "identity":
        r = np.real(np.einsum("ci,kci->kc", cells.v.conj(), cells.grad))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(cells.supp, r / np.where(cells.supp, cells.mag, 1.0), 0.0)
    if mode == "difference":
        mag_field = TestField(v.grid, v.magnitude())
        return cell_data(mag_field).grad[:, :, 0]
    raise ValueError(f"Unknown gradient mode: {mode}")


def elasticity_xy(v: TestField, mode: GradientMode = "identity") -> XYDecomposition:
    if v.grid.n != 2 or v.m != 2:
        raise ValueError(f"XY decomposition needs n = m = 2, got n = {v.grid.n}, m = {v.m}")
    if not v.is_real:
        raise ValueError("XY decomposition is defined for real fields")
    cells = cell_data(v, EPS_SUPP)
    if not np.any(cells.supp):
        raise ValueError("field vanishes identically")
    dmag = _magnitude_gradient(v, cells, mode)
    v1, v2 = cells.v[:, 0].real, cells.v[:, 1].real
    G = cells.grad.real
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(cells.supp, 1.0 / np.where(cells.supp, cells.mag, 1.0), 0.0)
    X1 = inv * (v1 * dmag[0] + v2 * dmag[1])
    X2 = inv * (v2 * dmag[0] - v1 * dmag[1])
    div = G[0, :, 0] + G[1, :, 1]
    curl = G[0, :, 1] - G[1, :, 0]
    Y1 = np.where(cells.supp, div - X1, 0.0)
    Y2 = np.where(cells.supp, curl - X2, 0.0)
    return XYDecomposition(
        X1, X2, Y1, Y2, cells.supp, np.sum(G**2, axis=(0, 2)), cells.weight
    )


def elasticity_xy_identities(v: TestField, mode: GradientMode = "identity") -> IdentityReport:
    xy = elasticity_xy(v, mode)
    m = xy.mask
    total = xy.X1**2 + xy.X2**2 + xy.Y1**2 + xy.Y2**2
    rel = float(np.max(np.abs(xy.dirichlet[m] - total[m])) / np.max(xy.dirichlet[m]))
    energy = float(np.sum(xy.dirichlet[m]))
    magic = abs(float(np.sum((xy.X1 * xy.Y1 + xy.X2 * xy.Y2)[m]))) / energy
    logger.debug("XY identities (%s): rel_xy=%.3e magic=%.3e", mode, rel, magic)
    return IdentityReport(rel, magic, mode, int(np.sum(m)))


def analytic_field(kind: str, nodes: int) -> TestField:
    """Reference fields on the unit square used for the identity checks."""
    grid = Grid((0.0, 0.0), (1.0, 1.0), (nodes, nodes))
    x = grid.mesh()
    s1, s2 = np.sin(np.pi * x[..., 0]), np.sin(np.pi * x[..., 1])
    if kind == "single":
        vals = np.stack([s1 * s2, np.zeros_like(s1)], axis=-1)
    elif kind == "equal":
        vals = np.stack([s1 * s2, s1 * s2], axis=-1)
    elif kind == "mixed":
        vals = np.stack([s1 * s2, np.sin(2.0 * np.pi * x[..., 0]) * s2], axis=-1)
    else:
        raise ValueError(f"Unknown analytic field: {kind}")
    vals[0, :] = vals[-1, :] = vals[:, 0] = vals[:, -1] = 0.0
    return TestField(grid, vals)
