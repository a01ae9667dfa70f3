"""
Quadrature of the dissipativity functional

    int Re<A^{hk} d_k v, d_h v>
        - cp |v|^-4 Re<A^{hk} v, v> Re<v, d_k v> Re<v, d_h v>
        - (1 - 2/p) |v|^-2 Re(<A^{hk} v, d_h v> Re<v, d_k v> - <A^{hk} d_k v, v> Re<v, d_h v>)

on a grid field v, which is nonnegative for every v exactly when the operator
is L^p-dissipative. Everything is evaluated at cell midpoints: values are
corner averages, gradients are averaged differences (the gradient of the
multilinear interpolant). The singular terms are extended by zero where
|v| < 1e-12 max|v|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConsistencyError
from ..logging import get_logger
from ..operators import OperatorSpec
from ..types import OperatorKind, PExponent
from .testfield import TestField

logger = get_logger(__name__)

EPS_SUPP = 1e-12
MIN_INTERIOR = 4
DUAL_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class CellData:
    """Midpoint values (C, m), gradients (n, C, m) and |v| (C,) of a grid field."""

    v: np.ndarray
    grad: np.ndarray
    mag: np.ndarray
    supp: np.ndarray          # |v| above the extension-by-zero threshold
    centers: np.ndarray       # (C, n)
    weight: float


def _average(a: np.ndarray, axis: int) -> np.ndarray:
    lo = [slice(None)] * a.ndim
    hi = [slice(None)] * a.ndim
    lo[axis], hi[axis] = slice(None, -1), slice(1, None)
    return 0.5 * (a[tuple(lo)] + a[tuple(hi)])


def cell_data(v: TestField, eps: float = EPS_SUPP) -> CellData:
    grid = v.grid
    for k, s in enumerate(grid.shape):
        if s - 2 < MIN_INTERIOR:
            raise ValueError(
                f"grid too coarse: axis {k} has {s - 2} interior nodes, need {MIN_INTERIOR}"
            )
    vals = v.values
    n = grid.n
    mid = vals
    for axis in range(n):
        mid = _average(mid, axis)
    grads = []
    for k, h in enumerate(grid.spacing):
        d = np.diff(vals, axis=k) / h
        for axis in range(n):
            if axis != k:
                d = _average(d, axis)
        grads.append(d.reshape(-1, v.m))
    mid = mid.reshape(-1, v.m)
    mag = np.sqrt(np.sum(np.abs(mid) ** 2, axis=1))
    peak = float(np.max(np.abs(v.magnitude()))) if vals.size else 0.0
    return CellData(
        v=mid,
        grad=np.stack(grads),
        mag=mag,
        supp=mag > eps * peak if peak > 0 else np.zeros_like(mag, dtype=bool),
        centers=grid.cell_centers().reshape(-1, n),
        weight=grid.cell_volume,
    )


def integrand(op: OperatorSpec, p: PExponent, cells: CellData) -> np.ndarray:
    """Pointwise integrand at the cell midpoints."""
    n, m = op.n, op.m
    if cells.grad.shape[0] != n or cells.v.shape[1] != m:
        raise ValueError(
            f"Field with n = {cells.grad.shape[0]}, m = {cells.v.shape[1]} does not fit operator "
            f"with n = {n}, m = {m}"
        )
    count = cells.v.shape[0]
    B = np.broadcast_to(op.blocks_at(cells.centers), (n, n, count, m, m))
    v, G = cells.v, cells.grad
    vc, Gc = v.conj(), G.conj()
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2 = np.where(cells.supp, 1.0 / np.where(cells.supp, cells.mag, 1.0) ** 2, 0.0)
    r = np.real(np.einsum("ci,kci->kc", v, Gc))                    # Re<v, d_k v>
    term1 = np.real(np.einsum("hkcij,kcj,hci->c", B, G, Gc))
    avv = np.real(np.einsum("hkcij,cj,ci->hkc", B, v, vc))          # Re<A^{hk} v, v>
    term2 = p.cp * inv2**2 * np.einsum("hkc,kc,hc->c", avv, r, r)
    a_v_dh = np.einsum("hkcij,cj,hci->hkc", B, v, Gc)               # <A^{hk} v, d_h v>
    a_dk_v = np.einsum("hkcij,kcj,ci->hkc", B, G, vc)               # <A^{hk} d_k v, v>
    comm = np.real(np.einsum("hkc,kc->c", a_v_dh, r) - np.einsum("hkc,hc->c", a_dk_v, r))
    term3 = p.commutator * inv2 * comm
    return term1 - term2 - term3


def elasticity_integrand(op: OperatorSpec, p: PExponent, cells: CellData) -> np.ndarray:
    """-cp |grad|v||^2 + sum_j |grad v_j|^2 - gamma cp |v|^-2 |v_h d_h|v||^2 + gamma |div v|^2."""
    if op.elasticity is None:
        raise ValueError("elasticity_integrand needs an elasticity operator")
    if np.any(cells.v.imag != 0.0) or np.any(cells.grad.imag != 0.0):
        raise ValueError("the elasticity form is defined for real fields only")
    gamma = op.elasticity.gamma
    v, G = cells.v.real, cells.grad.real
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(cells.supp, 1.0 / np.where(cells.supp, cells.mag, 1.0), 0.0)
    r = np.einsum("ci,kci->kc", v, G)
    grad_mag = r * inv                                  # d_k |v|
    gm2 = np.sum(grad_mag**2, axis=0)
    dirichlet = np.sum(G**2, axis=(0, 2))
    radial = np.einsum("ch,hc->c", v, grad_mag) * inv   # |v|^-1 v_h d_h |v|
    div = G[0, :, 0] + G[1, :, 1]
    return -p.cp * gm2 + dirichlet - gamma * p.cp * radial**2 + gamma * div**2


def form_value(op: OperatorSpec, p: PExponent, v: TestField, eps: float = EPS_SUPP) -> float:
    cells = cell_data(v, eps)
    value = float(np.sum(integrand(op, p, cells)) * cells.weight)
    if op.kind is OperatorKind.ELASTICITY:
        special = float(np.sum(elasticity_integrand(op, p, cells)) * cells.weight)
        scale = float(np.sum(np.abs(cells.grad) ** 2)) * cells.weight
        if abs(value - special) > DUAL_RTOL * max(abs(value), abs(special), scale * 1e-6, 1e-300):
            raise ConsistencyError(
                f"general and elasticity assemblies disagree: {value!r} vs {special!r}"
            )
    logger.debug("form_value on %s grid: %.6g", v.grid.shape, value)
    return value


def elasticity_form_value(op: OperatorSpec, p: PExponent, v: TestField, eps: float = EPS_SUPP) -> float:
    cells = cell_data(v, eps)
    return float(np.sum(elasticity_integrand(op, p, cells)) * cells.weight)
