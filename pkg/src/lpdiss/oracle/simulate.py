"""
Method-of-lines evolution u_t = (A(x) u')' with Dirichlet ends, integrated by
RK4, tracking the L^p norm. An L^p-dissipative operator never lets it grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..logging import get_logger
from ..operators import OperatorSpec
from ..types import OperatorKind, PExponent
from .testfield import TestField

logger = get_logger(__name__)

CFL = 0.4
MONOTONE_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SimResult:
    times: np.ndarray
    norms: np.ndarray
    monotone: bool
    max_relative_increase: float
    steps: int

    def to_dict(self) -> dict[str, object]:
        return {
            "monotone": self.monotone,
            "max_relative_increase": self.max_relative_increase,
            "steps": self.steps,
            "final_norm": float(self.norms[-1]),
            "initial_norm": float(self.norms[0]),
        }


def lp_norm(u: np.ndarray, p: float, h: float) -> float:
    mag = np.sqrt(np.sum(np.abs(u) ** 2, axis=-1))
    return float((np.sum(mag**p) * h) ** (1.0 / p))


def contraction_sim(op: OperatorSpec, p: PExponent, u0: TestField, T: float, dt: float) -> SimResult:
    if op.kind not in (OperatorKind.DIAGONAL, OperatorKind.SCALAR) or op.n != 1:
        raise ValueError("contraction_sim needs a one-dimensional diagonal system")
    if u0.grid.n != 1 or u0.m != op.m:
        raise ValueError(f"Initial field must be 1D with m = {op.m}")
    if T <= 0 or dt <= 0:
        raise ValueError(f"T and dt must be positive, got T = {T}, dt = {dt}")
    (h,) = u0.grid.spacing
    x = u0.grid.axes()[0]
    mids = 0.5 * (x[1:] + x[:-1])
    A = op.blocks_at(mids[:, None])[0, 0]                       # (E or 1, m, m)
    a_max = float(max(np.linalg.norm(M, 2) for M in A))
    limit = CFL * h * h / a_max
    if dt > limit:
        raise ValueError(f"CFL violation: dt = {dt} exceeds {limit:.3e} = 0.4 h^2 / max|A|")

    def rhs(u: np.ndarray) -> np.ndarray:
        flux = np.einsum("eij,ej->ei", np.broadcast_to(A, (u.shape[0] - 1,) + A.shape[1:]), np.diff(u, axis=0)) / h
        du = np.zeros_like(u)
        du[1:-1] = (flux[1:] - flux[:-1]) / h
        return du

    steps = max(1, int(math.ceil(T / dt - 1e-12)))
    u = u0.values.copy()
    norms = [lp_norm(u, p.p, h)]
    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norms.append(lp_norm(u, p.p, h))
    arr = np.asarray(norms)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(arr[:-1] > 0, (arr[1:] - arr[:-1]) / arr[:-1], 0.0)
    worst = float(np.max(rel)) if rel.size else 0.0
    logger.info("contraction_sim p=%g: %d steps, max relative increase %.3e", p.p, steps, worst)
    return SimResult(
        times=dt * np.arange(steps + 1),
        norms=arr,
        monotone=worst <= MONOTONE_RTOL,
        max_relative_increase=worst,
        steps=steps,
    )
