"""
Test fields that drive the functional negative when the algebraic criterion
fails.

Diagonal systems: a cubic ramp mu*omega + s(x_h/l)*lambda along axis h under a
cutoff of half width W = R mu^2 l. On the ramp the integrand is about
s'^2 P(lambda, omega)/l^2, while the cutoff costs O(mu^2 / W).

Two-dimensional systems: (mu*omega + lambda phi(x) cos(k<xi, x>)) times
eta(log|x| / log R). The oscillation contributes k^2 P_{A(xi)}(lambda, omega)
on the support of phi and the logarithmic cutoff costs O(mu^2 / log R); k is
chosen so the first term beats the second by a safety factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from ..logging import get_logger
from ..operators import OperatorSpec
from ..sampling import SplitMix64
from ..scalar import scalar_check
from ..systems import PairSamples, general2d_necessary, minimize_pairs, pq_batch, system_check
from ..types import DomainBox, OperatorKind, PExponent, SamplingPlan, Status, Witness
from .functional import form_value
from .testfield import Grid, TestField, boundary_layer, random_testfield

logger = get_logger(__name__)

MU_LADDER = (10.0, 100.0, 1000.0)
R_LADDER = (8.0, 32.0, 128.0)
NODE_CAP_1D = 300_000
NODE_CAP = 600_000
VIOLATION_TOL = -1e-8
CUTOFF_ENERGY = 2.4          # int eta'^2 over one transition of the smoothstep cutoff
PHI_WEIGHT = math.pi / 10.0  # (1/2) int (1 - |y|^2)^4 over the unit disc
THETA_NODES = 256


@dataclass(frozen=True)
class WitnessParams:
    mu_amp: float
    cutoff_R: float
    ramp_length: float = 1.0
    ramp_points: int = 8           # nodes per ramp length
    safety: float = 4.0
    points_per_wavelength: float = 5.0

    def __post_init__(self) -> None:
        if not self.mu_amp > 0:
            raise ValueError(f"mu_amp must be positive, got {self.mu_amp}")
        if not self.cutoff_R > 2:
            raise ValueError(f"cutoff_R must exceed 2, got {self.cutoff_R}")
        if self.ramp_length <= 0 or self.ramp_points < 2:
            raise ValueError("ramp_length must be positive and ramp_points >= 2")


def smoothstep(u: np.ndarray) -> np.ndarray:
    t = np.clip(u, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cutoff(t: np.ndarray) -> np.ndarray:
    """1 on |t| <= 1/2, 0 on |t| >= 1, smoothstep in between."""
    return 1.0 - smoothstep(2.0 * np.abs(t) - 1.0)


def log_cutoff(r: np.ndarray, R: float) -> np.ndarray:
    """eta(log r / log R): 1 for r <= sqrt(R), 0 for r >= R."""
    t = np.log(np.maximum(r, 1.0)) / math.log(R)
    return 1.0 - smoothstep(2.0 * t - 1.0)


def _vec(z: Sequence[complex] | None, name: str) -> np.ndarray:
    if z is None:
        raise ValueError(f"witness has no {name}")
    return np.asarray(z, dtype=complex)


def _is_ramp(op: OperatorSpec) -> bool:
    return op.kind is OperatorKind.DIAGONAL or (op.kind is OperatorKind.SCALAR and op.n == 1)


# -- grids ---------------------------------------------------------------------


def _ramp_grid(witness: Witness, op: OperatorSpec, wp: WitnessParams) -> Grid:
    h_axis = (witness.h or 1) - 1
    ell = wp.ramp_length
    W = wp.cutoff_R * wp.mu_amp**2 * ell
    dx = ell / wp.ramp_points
    lo, hi, shape = [], [], []
    for j in range(op.n):
        step = dx if j == h_axis else W / 16.0
        half = W + 2.0 * step
        lo.append(witness.x[j] - half)
        hi.append(witness.x[j] + half)
        shape.append(int(round(2.0 * half / step)) + 1)
    return Grid(tuple(lo), tuple(hi), tuple(shape))


@dataclass(frozen=True)
class _Wave:
    k: float
    delta: float
    step: float
    P: float


def _wave(witness: Witness, op: OperatorSpec, p: PExponent, wp: WitnessParams) -> _Wave:
    xi = np.asarray(_vec(witness.xi, "xi").real, dtype=float)
    xi = xi / np.linalg.norm(xi)
    lam, om = _vec(witness.lam, "lambda"), _vec(witness.omega, "omega")
    lam = lam / np.linalg.norm(lam)
    blocks = op.blocks_at(np.asarray([witness.x]))[:, :, 0]
    B = sum(blocks[h, k] * xi[h] * xi[k] for h in range(2) for k in range(2))
    P = float(pq_batch(B, p, lam[None, :], om[None, :])[0][0])
    if P >= 0:
        raise ValueError(f"witness does not violate the condition (P = {P:.3e})")
    theta = np.linspace(0.0, 2.0 * math.pi, THETA_NODES, endpoint=False)
    ang = 0.0
    for c, s in zip(np.cos(theta), np.sin(theta)):
        At = blocks[0, 0] * c * c + (blocks[0, 1] + blocks[1, 0]) * c * s + blocks[1, 1] * s * s
        ang += float(np.real(np.vdot(om, At @ om)))
    ang *= 2.0 * math.pi / THETA_NODES
    cost = p.four_over_ppc * wp.mu_amp**2 * CUTOFF_ENERGY / math.log(wp.cutoff_R) * max(ang, 0.0)
    kappa = math.sqrt(max(wp.safety * cost, 1.0) / (PHI_WEIGHT * abs(P)))
    delta = 0.9 * math.sqrt(wp.cutoff_R)
    k = kappa / delta
    return _Wave(k, delta, 2.0 * math.pi / (wp.points_per_wavelength * k), P)


def _wave_grid(witness: Witness, wave: _Wave, wp: WitnessParams) -> Grid:
    half = wp.cutoff_R + 2.0 * wave.step
    nodes = int(math.ceil(2.0 * half / wave.step)) + 1
    x0 = witness.x
    return Grid((x0[0] - half, x0[1] - half), (x0[0] + half, x0[1] + half), (nodes, nodes))


def witness_grid(witness: Witness, op: OperatorSpec, p: PExponent, wp: WitnessParams) -> Grid:
    """The smallest grid carrying the witness field for these parameters."""
    if _is_ramp(op):
        return _ramp_grid(witness, op, wp)
    if op.n == 2:
        return _wave_grid(witness, _wave(witness, op, p, wp), wp)
    raise ValueError(f"No witness construction for {op.kind.value} with n = {op.n}")


# -- fields --------------------------------------------------------------------


def _covers(grid: Grid, needed: Grid) -> bool:
    return all(a <= b + 1e-12 for a, b in zip(grid.lo, needed.lo)) and all(
        a >= b - 1e-12 for a, b in zip(grid.hi, needed.hi)
    )


def witness_testfield(
    witness: Witness,
    op: OperatorSpec,
    p: PExponent,
    wp: WitnessParams,
    grid: Grid | None = None,
) -> TestField:
    needed = witness_grid(witness, op, p, wp)
    if grid is None:
        grid = needed
    elif not _covers(grid, needed):
        raise ValueError(
            f"cutoff_R = {wp.cutoff_R} too large for the grid; extend it to cover "
            f"{needed.lo} .. {needed.hi}"
        )
    lam, om = _vec(witness.lam, "lambda"), _vec(witness.omega, "omega")
    lam = lam / np.linalg.norm(lam)
    pts = grid.mesh()
    y = pts - np.asarray(witness.x)
    if _is_ramp(op):
        h_axis = (witness.h or 1) - 1
        ell = wp.ramp_length
        W = wp.cutoff_R * wp.mu_amp**2 * ell
        eta = np.prod(cutoff(y / W), axis=-1)
        s = smoothstep(y[..., h_axis] / ell)
        vals = eta[..., None] * (wp.mu_amp * om + s[..., None] * lam)
    else:
        wave = _wave(witness, op, p, wp)
        xi = np.asarray(_vec(witness.xi, "xi").real, dtype=float)
        xi = xi / np.linalg.norm(xi)
        r2 = np.sum(y * y, axis=-1)
        phi = np.clip(1.0 - r2 / wave.delta**2, 0.0, None) ** 2
        psi = phi * np.cos(wave.k * (y @ xi))
        eta = log_cutoff(np.sqrt(r2), wp.cutoff_R)
        vals = eta[..., None] * (wp.mu_amp * om + psi[..., None] * lam)
        if op.kind is OperatorKind.ELASTICITY:
            vals = vals.real.astype(complex)
    vals[boundary_layer(grid.shape)] = 0.0
    return TestField(grid, vals)


# -- search --------------------------------------------------------------------


def criterion_witness(op: OperatorSpec, p: PExponent, plan: SamplingPlan) -> Witness | None:
    """Worst (x, lambda, omega[, xi]) of the algebraic condition, or None when it holds."""
    if _is_ramp(op):
        diag = op if op.kind is OperatorKind.DIAGONAL else OperatorSpec.diagonal(op.fields)
        verdict = system_check(diag, p, plan)
        return verdict.witness if verdict.status is Status.FAILS else None
    if op.kind is OperatorKind.SCALAR and op.n == 2:
        verdict = scalar_check(op.fields[0], p, plan)
        if verdict.status is not Status.FAILS or verdict.witness is None:
            return None
        wit = verdict.witness
        xi = np.asarray(wit.xi)
        A = op.fields[0].at(wit.x)
        B = np.array([[xi @ A @ xi]], dtype=complex)
        found = minimize_pairs(lambda l, w: pq_batch(B, p, l, w)[0], PairSamples.draw(1, plan), 1, plan.refine_iters)
        return Witness(x=wit.x, xi=wit.xi, lam=found.lam, omega=found.om)
    if op.n == 2:
        verdict = general2d_necessary(op, p, plan)
        return verdict.witness if verdict.status is Status.FAILS else None
    return None


@dataclass(frozen=True, eq=False)
class Violation:
    field: TestField
    value: float
    source: str
    evaluations: int

    def to_dict(self) -> dict[str, object]:
        return {"value": self.value, "source": self.source, "evaluations": self.evaluations,
                "grid": self.field.grid.to_dict()}


def _feasible(grid: Grid, op: OperatorSpec) -> bool:
    cap = NODE_CAP_1D if grid.n == 1 else NODE_CAP
    if grid.size > cap:
        return False
    box = op.box
    if op.is_constant or box is None:
        return True
    return all(a >= b for a, b in zip(grid.lo, box.lo)) and all(a <= b for a, b in zip(grid.hi, box.hi))


def _random_grid(op: OperatorSpec) -> Grid:
    box = op.box if op.box is not None else DomainBox((0.0,) * op.n, (1.0,) * op.n)
    return Grid.uniform(box, 512 if op.n == 1 else 128)


def violation_search(
    op: OperatorSpec,
    p: PExponent,
    budget: int = 64,
    plan: SamplingPlan | None = None,
    mu_ladder: Sequence[float] = MU_LADDER,
    r_ladder: Sequence[float] = R_LADDER,
) -> Violation | None:
    """
    First test field with a functional value below -1e-8: the witness ladder
    over (mu, R) when the criterion fails, then random bump superpositions.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    plan = plan or SamplingPlan()
    used = 0
    witness = criterion_witness(op, p, plan)
    if witness is not None:
        for mu, R in product(mu_ladder, r_ladder):
            wp = WitnessParams(mu, R)
            grid = witness_grid(witness, op, p, wp)
            if not _feasible(grid, op):
                logger.debug("ladder rung mu=%g R=%g skipped: %d nodes", mu, R, grid.size)
                continue
            if used >= budget:
                return None
            used += 1
            field = witness_testfield(witness, op, p, wp, grid)
            value = form_value(op, p, field)
            logger.debug("ladder rung mu=%g R=%g: %.6g", mu, R, value)
            if value < VIOLATION_TOL:
                return Violation(field, value, f"ladder mu={mu:g} R={R:g}", used)
    gen = SplitMix64(plan.seed)
    grid = _random_grid(op)
    real = op.kind is OperatorKind.ELASTICITY
    while used < budget:
        used += 1
        field = random_testfield(grid, op.m, gen, real=real)
        value = form_value(op, p, field)
        if value < VIOLATION_TOL:
            return Violation(field, value, f"random #{used}", used)
    logger.info("violation_search p=%g: nothing below %.0e in %d evaluations", p.p, VIOLATION_TOL, used)
    return None
