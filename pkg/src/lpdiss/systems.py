"""
Systems A u = d_h(A^h(x) d_h u) with complex m x m coefficients.

A is L^p-dissipative iff P_h(x, lambda, omega) >= 0 for a.e. x, every lambda
and every unit omega, where

    P = Re<A l, l> - cp Re<A w, w> (Re<l, w>)^2
        - (1 - 2/p) Re(<A w, l> - <A l, w>) Re<l, w>

and Q is the same expression with Im in place of the outer Re. For real
symmetric coefficients this collapses to an inequality between the extreme
eigenvalues. The module also carries the shift corollaries against
I d^2/dx^2, the necessary condition for general two-dimensional systems and
the angle of dissipativity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ConsistencyError, HypothesisError, PreconditionError
from .fields import CoefficientField
from .linalg import herm_eigs, is_symmetric, sym_eigs
from .logging import get_logger
from .operators import OperatorSpec
from .sampling import SplitMix64, corner_probes, sample_points
from .search import multistart
from .types import (
    BOUNDARY_RTOL,
    AngleInterval,
    DomainBox,
    OperatorKind,
    PExponent,
    PInterval,
    PQValue,
    SamplingPlan,
    ShiftMode,
    ShiftReport,
    Status,
    Verdict,
    Witness,
    classify_margin,
)

logger = get_logger(__name__)

UNIT_TOL = 1e-12
REAL_TOL = 1e-12
PARALLEL_TOL = 1e-8
TRACE_DET_TOL = 1e-10
N_STARTS = 3
MIX_ANGLES = 16
XI_ANGLES = 64
LADDER_FACTORS = (1.0, 10.0, 100.0)

Array = np.ndarray


# -- P and Q -----------------------------------------------------------------


def pq_batch(A: Array, p: PExponent, lam: Array, om: Array) -> tuple[Array, Array]:
    """P and Q for a single matrix and K pairs given as (K, m) rows."""
    Al = lam @ A.T
    Ao = om @ A.T
    ll = np.sum(Al * lam.conj(), axis=1)
    oo = np.sum(Ao * om.conj(), axis=1)
    comm = np.sum(Ao * lam.conj(), axis=1) - np.sum(Al * om.conj(), axis=1)
    r = np.real(np.sum(lam * om.conj(), axis=1))
    t = p.commutator
    P = ll.real - p.cp * oo.real * r * r - t * comm.real * r
    Q = ll.imag - p.cp * oo.imag * r * r - t * comm.imag * r
    return P, Q


def pq_values(Ah: Array, p: PExponent, lam: Sequence[complex], omega: Sequence[complex]) -> PQValue:
    A = np.asarray(Ah, dtype=complex)
    lam_a = np.asarray(lam, dtype=complex).reshape(1, -1)
    om_a = np.asarray(omega, dtype=complex).reshape(1, -1)
    if A.shape != (lam_a.shape[1],) * 2 or om_a.shape != lam_a.shape:
        raise ValueError(
            f"Shapes do not match: A {A.shape}, lambda {lam_a.shape[1]}, omega {om_a.shape[1]}"
        )
    norm = float(np.linalg.norm(om_a))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"omega must be a unit vector, got |omega| = {norm!r}")
    P, Q = pq_batch(A, p, lam_a, om_a)
    return PQValue(float(P[0]), float(Q[0]))


# -- pair sampling -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PairSamples:
    """Sampled unit pairs (lambda, omega), shared by every x of a search."""

    lam: Array
    om: Array
    complex_: bool

    @classmethod
    def draw(cls, m: int, plan: SamplingPlan, complex_: bool = True) -> "PairSamples":
        gen = SplitMix64(plan.seed)
        lam = gen.unit_vectors(plan.n_directions, m, complex_=complex_)
        om = gen.unit_vectors(plan.n_directions, m, complex_=complex_)
        aligned = om[: max(1, plan.n_directions // 4)]
        return cls(
            np.vstack([lam, aligned]).astype(complex),
            np.vstack([om, aligned]).astype(complex),
            complex_,
        )

    def __len__(self) -> int:
        return self.lam.shape[0]


def _mix_candidates(A: Array, real: bool = False) -> tuple[Array, Array]:
    """Unit pairs built from the extreme eigenvectors of the Hermitian part of A."""
    H = 0.5 * (A + A.conj().T)
    eig = sym_eigs(H.real) if real else herm_eigs(H)
    assert eig.vectors is not None
    e1, em = eig.vectors[:, 0], eig.vectors[:, -1]
    # a repeated extreme eigenvalue (always for m = 1) leaves e1 and em parallel
    em = em - np.vdot(e1, em) * e1
    norm = float(np.linalg.norm(em))
    if norm < PARALLEL_TOL:
        vecs = e1[None, :]
    else:
        em = em / norm
        t = np.linspace(0.0, math.pi, MIX_ANGLES, endpoint=False)
        vecs = np.cos(t)[:, None] * e1[None, :] + np.sin(t)[:, None] * em[None, :]
    k = vecs.shape[0]
    lam = np.repeat(vecs, k, axis=0)
    om = np.tile(vecs, (k, 1))
    return lam, om


def _pack(lam: Array, om: Array, complex_: bool) -> Array:
    if complex_:
        return np.concatenate([lam.real, lam.imag, om.real, om.imag])
    return np.concatenate([lam.real, om.real])


def _unpack_rows(Z: Array, m: int, complex_: bool) -> tuple[Array, Array, Array]:
    """Unit (lambda, omega) rows from packed real rows, and a mask of rows with omega != 0."""
    if complex_:
        lam = Z[:, :m] + 1j * Z[:, m : 2 * m]
        om = Z[:, 2 * m : 3 * m] + 1j * Z[:, 3 * m :]
    else:
        lam, om = Z[:, :m].astype(complex), Z[:, m:].astype(complex)
    nl = np.linalg.norm(lam, axis=1, keepdims=True)
    no = np.linalg.norm(om, axis=1, keepdims=True)
    lam = lam / np.where(nl > 0, nl, 1.0)
    om = om / np.where(no > 0, no, 1.0)
    return lam, om, no[:, 0] > 0


def _unpack(z: Array, m: int, complex_: bool) -> tuple[Array, Array]:
    lam, om, _ = _unpack_rows(np.asarray(z, dtype=float)[None, :], m, complex_)
    return lam[0], om[0]


def _top_indices(values: Array, k: int) -> list[int]:
    """Indices of the k smallest values; stable, so ties go to the earliest sample."""
    order = np.argsort(values, kind="stable")
    return [int(i) for i in order[:k]]


@dataclass(frozen=True)
class _PairMin:
    value: float
    lam: tuple[complex, ...]
    om: tuple[complex, ...]
    samples: int


def minimize_pairs(
    objective: Callable[[Array, Array], Array],
    pairs: PairSamples,
    m: int,
    rounds: int,
    extra: tuple[Array, Array] | None = None,
) -> _PairMin:
    """
    Minimise a batched objective over unit pairs: sampled and extra candidates
    first, then coordinate refinement from the best few, all starts at once.
    """
    lam, om = pairs.lam, pairs.om
    if extra is not None:
        lam = np.vstack([extra[0].astype(complex), lam])
        om = np.vstack([extra[1].astype(complex), om])
    vals = objective(lam, om)
    top = _top_indices(vals, N_STARTS)
    starts = np.vstack([_pack(lam[i], om[i], pairs.complex_) for i in top])
    best_i = top[0]

    def batch(Z: Array) -> Array:
        l, w, ok = _unpack_rows(Z, m, pairs.complex_)
        out = np.asarray(objective(l, w), dtype=float)
        return np.where(ok & np.isfinite(out), out, math.inf)

    z, refined = multistart(batch, starts, rounds=rounds, batched=True)
    if refined < vals[best_i]:
        l, w = _unpack(z, m, pairs.complex_)
        return _PairMin(refined, tuple(complex(c) for c in l), tuple(complex(c) for c in w), len(vals))
    return _PairMin(
        float(vals[best_i]),
        tuple(complex(c) for c in lam[best_i]),
        tuple(complex(c) for c in om[best_i]),
        len(vals),
    )


# -- x sampling ----------------------------------------------------------------


def _points(op: OperatorSpec, plan: SamplingPlan, box: DomainBox | None = None) -> Array:
    box = box if box is not None else op.box
    if op.is_constant or box is None:
        if not op.is_constant:
            raise ValueError("Non-constant fields need a domain box")
        return np.zeros((1, op.n)) if box is None else np.asarray([box.center])
    return np.asarray(sample_points(box, plan) + corner_probes(box))


def _diag_op(fields: Sequence[CoefficientField] | OperatorSpec) -> OperatorSpec:
    if isinstance(fields, OperatorSpec):
        if fields.kind is not OperatorKind.DIAGONAL:
            raise ValueError(f"Expected a diagonal system, got {fields.kind.value}")
        return fields
    return OperatorSpec.diagonal(fields)


def _rebox(op: OperatorSpec, box: DomainBox) -> OperatorSpec:
    fields = tuple(f if f.is_constant else f.with_box(box) for f in op.fields)
    return OperatorSpec(op.kind, op.n, op.m, fields, op.elasticity)


# -- general criterion ---------------------------------------------------------


def system_check(
    fields: Sequence[CoefficientField] | OperatorSpec, p: PExponent, plan: SamplingPlan
) -> Verdict:
    """Sampled minimum of P per h; holds iff every h holds."""
    op = _diag_op(fields)
    pts = _points(op, plan)
    blocks = op.blocks_at(pts)
    pairs = PairSamples.draw(op.m, plan)
    scale = float(np.max(np.abs(blocks)))
    per_h = []
    for h in range(op.n):
        worst: tuple[float, int] = (math.inf, 0)
        total = 0
        for i in range(blocks.shape[2]):
            P, _ = pq_batch(blocks[h, h, i], p, pairs.lam, pairs.om)
            total += P.shape[0]
            k = int(np.argmin(P))
            if P[k] < worst[0]:
                worst = (float(P[k]), i)
        i = worst[1]
        A = blocks[h, h, i]
        found = minimize_pairs(
            lambda l, w, A=A: pq_batch(A, p, l, w)[0],
            pairs,
            op.m,
            plan.refine_iters,
            extra=_mix_candidates(A),
        )
        status, boundary = classify_margin(found.value, scale)
        x = tuple(float(c) for c in pts[i])
        logger.debug("system_check h=%d: min P = %.6g at x = %s", h + 1, found.value, x)
        per_h.append(
            Verdict(
                status=status,
                margin=found.value,
                witness=Witness(x=x, h=h + 1, lam=found.lam, omega=found.om),
                boundary=boundary,
                samples=total + found.samples,
                sampled=not op.is_constant,
            )
        )
    worst_h = min(per_h, key=lambda v: v.margin)
    status = Status.FAILS if any(v.status is Status.FAILS for v in per_h) else Status.HOLDS
    logger.info("system_check p=%g: %s margin=%.6g", p.p, status.value, worst_h.margin)
    return Verdict(
        status=status,
        margin=worst_h.margin,
        witness=worst_h.witness,
        boundary=worst_h.boundary,
        samples=sum(v.samples for v in per_h),
        sampled=not op.is_constant,
        per_h=tuple(per_h),
    )


# -- real symmetric coefficients -----------------------------------------------


def _real_symmetric(A: Array, x: tuple[float, ...], h: int) -> Array:
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A.imag)) > REAL_TOL * scale:
        raise HypothesisError(f"coefficient of h = {h} is not real at x = {x}", x=x, h=h)
    S = A.real
    if not is_symmetric(S):
        raise HypothesisError(f"coefficient of h = {h} is not symmetric at x = {x}", x=x, h=h)
    return 0.5 * (S + S.T)


def _extreme_eigs(op: OperatorSpec, pts: Array, require_psd: bool = True) -> list[list[tuple[float, float, Array]]]:
    """(mu_1, mu_m, S) per h and per point."""
    blocks = op.blocks_at(pts)
    out = []
    for h in range(op.n):
        row = []
        for i in range(blocks.shape[2]):
            x = tuple(float(c) for c in pts[min(i, pts.shape[0] - 1)])
            S = _real_symmetric(blocks[h, h, i], x, h + 1)
            eig = sym_eigs(S)
            mu1, mum = eig.smallest, eig.largest
            if require_psd and mu1 < -REAL_TOL * max(1.0, abs(mum)):
                raise HypothesisError(
                    f"coefficient of h = {h + 1} is indefinite at x = {x} (mu_1 = {mu1:.3e})",
                    x=x,
                    h=h + 1,
                )
            row.append((mu1, mum, S))
        out.append(row)
    return out


def eigen_margin(mu1: float, mum: float, p: PExponent) -> float:
    """mu_1 mu_m - (1/2 - 1/p)^2 (mu_1 + mu_m)^2."""
    return mu1 * mum - p.half_gap**2 * (mu1 + mum) ** 2


def sym_system_check(
    fields: Sequence[CoefficientField] | OperatorSpec, p: PExponent, plan: SamplingPlan
) -> Verdict:
    op = _diag_op(fields)
    pts = _points(op, plan)
    eigs = _extreme_eigs(op, pts)
    per_h = []
    for h, row in enumerate(eigs):
        margins = [eigen_margin(mu1, mum, p) for mu1, mum, _ in row]
        i = int(np.argmin(margins))
        mu1, mum, S = row[i]
        margin = margins[i]
        if op.m == 2:
            for (a, b, T) in row:
                td = float(np.linalg.det(T)) - p.half_gap**2 * float(np.trace(T)) ** 2
                if abs(td - eigen_margin(a, b, p)) > TRACE_DET_TOL * max(1.0, abs(b)) ** 2:
                    raise ConsistencyError(
                        f"trace/determinant form {td!r} disagrees with eigenvalue form "
                        f"{eigen_margin(a, b, p)!r}"
                    )
        scale = max(abs(mu1), abs(mum)) ** 2
        status, boundary = classify_margin(margin, scale)
        x = tuple(float(c) for c in pts[min(i, pts.shape[0] - 1)])
        witness = None
        if status is Status.FAILS:
            found = minimize_pairs(
                lambda l, w, A=S.astype(complex): pq_batch(A, p, l, w)[0],
                PairSamples.draw(op.m, plan, complex_=False),
                op.m,
                plan.refine_iters,
                extra=_mix_candidates(S.astype(complex), real=True),
            )
            witness = Witness(x=x, h=h + 1, lam=found.lam, omega=found.om)
        else:
            witness = Witness(x=x, h=h + 1)
        per_h.append(
            Verdict(
                status=status,
                margin=margin,
                witness=witness,
                boundary=boundary,
                samples=len(row),
                sampled=not op.is_constant,
                metadata={"mu1": mu1, "mum": mum},
            )
        )
    worst = min(per_h, key=lambda v: v.margin)
    status = Status.FAILS if any(v.status is Status.FAILS for v in per_h) else Status.HOLDS
    logger.info("sym_system_check p=%g: %s margin=%.6g", p.p, status.value, worst.margin)
    return Verdict(
        status=status,
        margin=worst.margin,
        witness=worst.witness,
        boundary=worst.boundary,
        samples=sum(v.samples for v in per_h),
        sampled=not op.is_constant,
        per_h=tuple(per_h),
        metadata=dict(worst.metadata),
    )


def sym_p_interval(mu1: float, mum: float) -> PInterval:
    """All p with |1/2 - 1/p| <= sqrt(mu_1 mu_m) / (mu_1 + mu_m)."""
    if mu1 < 0:
        raise ValueError(f"mu1 must be nonnegative, got {mu1}")
    if mum < mu1:
        raise ValueError(f"mum must be >= mu1, got mu1 = {mu1}, mum = {mum}")
    if mum == 0:
        raise ValueError("mu1 = mum = 0 gives no condition")
    if mu1 == 0:
        return PInterval(2.0, 2.0)
    bound = math.sqrt(mu1 * mum) / (mu1 + mum)
    if bound >= 0.5 - 1e-15:
        return PInterval(1.0, math.inf, closed_lo=False, closed_hi=False)
    return PInterval(1.0 / (0.5 + bound), 1.0 / (0.5 - bound))


def positivity_necessary(
    fields: Sequence[CoefficientField] | OperatorSpec, plan: SamplingPlan
) -> Verdict:
    """min Re<A^h l, l> over unit l, i.e. the smallest eigenvalue of the Hermitian part."""
    op = _diag_op(fields)
    pts = _points(op, plan)
    blocks = op.blocks_at(pts)
    worst = (math.inf, 0, 0, None)
    for h in range(op.n):
        for i in range(blocks.shape[2]):
            A = blocks[h, h, i]
            eig = herm_eigs(0.5 * (A + A.conj().T))
            if eig.smallest < worst[0]:
                worst = (eig.smallest, h, i, eig.vectors[:, 0])
    margin, h, i, vec = worst
    status, boundary = classify_margin(margin, float(np.max(np.abs(blocks))))
    x = tuple(float(c) for c in pts[min(i, pts.shape[0] - 1)])
    return Verdict(
        status=status,
        margin=margin,
        witness=Witness(x=x, h=h + 1, lam=tuple(complex(c) for c in vec)),
        boundary=boundary,
        samples=op.n * blocks.shape[2],
        necessary_only=True,
        sampled=not op.is_constant,
        notes=("necessary condition only",),
    )


# -- shift corollaries -----------------------------------------------------------


Direction = Literal["inf", "sup"]


def aitken(v: Sequence[float]) -> float:
    """Aitken delta-squared limit of the last three terms."""
    a, b, c = v[-3:]
    denom = (c - b) - (b - a)
    if denom == 0 or not math.isfinite(denom):
        return c
    return c - (c - b) ** 2 / denom


def ladder_limit(values: Sequence[float], direction: Direction, scale: float) -> float:
    """
    Limit of an extremum over growing truncation radii.

    Differences that do not contract mean divergence: -inf for an infimum,
    +inf for a supremum. Otherwise the Aitken extrapolation is returned,
    clipped so it never passes the last value in the wrong direction.
    """
    a, b, c = values[-3:]
    d1, d2 = b - a, c - b
    tol = 1e-12 * max(1.0, scale)
    if direction == "inf" and d2 < -tol and d2 <= d1:
        return -math.inf
    if direction == "sup" and d2 > tol and d2 >= d1:
        return math.inf
    limit = aitken(values)
    return min(limit, c) if direction == "inf" else max(limit, c)


def _truncated(
    evaluate: Callable[[DomainBox | None], float],
    box: DomainBox | None,
    direction: Direction,
    scale: Callable[[float], float] = abs,
) -> tuple[float, tuple[tuple[float, float], ...]]:
    if box is None or not box.truncated:
        return evaluate(box), ()
    radius = box.truncation_radius()
    assert radius is not None
    ladder = []
    for factor in LADDER_FACTORS:
        r = radius * factor
        ladder.append((r, evaluate(box.with_truncation(r))))
        logger.debug("truncation radius %g: %s = %.6g", r, direction, ladder[-1][1])
    values = [v for _, v in ladder]
    return ladder_limit(values, direction, scale(max(map(abs, values)))), tuple(ladder)


def _is_real_symmetric(op: OperatorSpec, plan: SamplingPlan) -> bool:
    blocks = op.blocks_at(_points(op, plan))
    for h in range(op.n):
        for i in range(blocks.shape[2]):
            A = blocks[h, h, i]
            scale = max(1.0, float(np.max(np.abs(A))))
            if np.max(np.abs(A.imag)) > REAL_TOL * scale or not is_symmetric(A.real):
                return False
    return True


def _lower_expression(mu1: float, mum: float, p: PExponent) -> float:
    s = p.sqrt_ppc
    return (1.0 + s / 2.0) * mu1 + (1.0 - s / 2.0) * mum


def _upper_expression(mu1: float, mum: float, p: PExponent) -> float:
    s = p.sqrt_ppc
    return (1.0 - s / 2.0) * mu1 + (1.0 + s / 2.0) * mum


def _eig_extreme(
    op: OperatorSpec,
    plan: SamplingPlan,
    expr: Callable[[float, float], float],
    direction: Direction,
    require_psd: bool = False,
) -> Callable[[DomainBox | None], float]:
    def evaluate(box: DomainBox | None) -> float:
        target = op if box is None else _rebox(op, box)
        eigs = _extreme_eigs(target, _points(target, plan, box), require_psd=require_psd)
        vals = [expr(mu1, mum) for row in eigs for mu1, mum, _ in row]
        return min(vals) if direction == "inf" else max(vals)

    return evaluate


def _p_ratio_extreme(op: OperatorSpec, p: PExponent, plan: SamplingPlan) -> Callable[[DomainBox | None], float]:
    """inf over x, h and unit pairs of P_A / P_I; P_I >= 4/(p p') |l|^2 > 0."""
    pairs = PairSamples.draw(op.m, plan)
    eye = np.eye(op.m, dtype=complex)

    def evaluate(box: DomainBox | None) -> float:
        target = op if box is None else _rebox(op, box)
        blocks = target.blocks_at(_points(target, plan, box))
        best = math.inf
        for h in range(target.n):
            for i in range(blocks.shape[2]):
                A = blocks[h, h, i]

                def ratio(l: Array, w: Array, A: Array = A) -> Array:
                    return pq_batch(A, p, l, w)[0] / pq_batch(eye, p, l, w)[0]

                found = minimize_pairs(ratio, pairs, op.m, plan.refine_iters, extra=_mix_candidates(A))
                best = min(best, found.value)
        return best

    return evaluate


def shift_lower_bound(
    fields: Sequence[CoefficientField] | OperatorSpec,
    p: PExponent,
    plan: SamplingPlan,
    mode: ShiftMode = "positive",
) -> ShiftReport:
    """
    Existence of k with A - k I d^2/dx^2 L^p-dissipative.

    positive: k > 0 exists iff ess inf [(1 + s/2) mu_1 + (1 - s/2) mu_m] > 0,
    s = sqrt(p p'); the largest admissible k is half that infimum.
    real: some real k exists iff the infimum is finite.
    nonnegative: for A >= 0, ess inf [mu_1 mu_m - (1/2 - 1/p)^2 (mu_1 + mu_m)^2] > 0
    is necessary, and sufficient when sup mu_m < inf.
    Fields that are not real symmetric use k_sup = inf P_A / P_I instead.
    """
    op = _diag_op(fields)
    box = op.box
    symmetric = _is_real_symmetric(op, plan)
    notes: list[str] = []
    if mode == "nonnegative":
        if not symmetric:
            raise HypothesisError("the nonnegative shift test needs real symmetric coefficients")
        value, ladder = _truncated(
            _eig_extreme(op, plan, lambda a, b: eigen_margin(a, b, p), "inf", require_psd=True),
            box,
            "inf",
        )
        sup_mu, _ = _truncated(_eig_extreme(op, plan, lambda a, b: b, "sup", require_psd=True), box, "sup")
        exists = value > BOUNDARY_RTOL * max(1.0, sup_mu**2 if math.isfinite(sup_mu) else 1.0)
        bounded = math.isfinite(sup_mu)
        if not bounded:
            notes.append("sup mu_m is infinite: the test is necessary only")
        return ShiftReport(
            exists=exists,
            criterion_value=value,
            mode=mode,
            truncation=ladder,
            notes=tuple(notes),
            metadata={"sup_mu_m": sup_mu, "necessary_only": not bounded},
        )

    if symmetric:
        value, ladder = _truncated(
            _eig_extreme(op, plan, lambda a, b: _lower_expression(a, b, p), "inf"), box, "inf"
        )
        k_sup = value / 2.0
    else:
        notes.append("coefficients are not real symmetric: k_sup from inf P_A / P_I")
        k_sup, ladder = _truncated(_p_ratio_extreme(op, p, plan), box, "inf")
        value = 2.0 * k_sup
    if mode == "positive":
        exists = value > BOUNDARY_RTOL * max(1.0, abs(value))
    elif mode == "real":
        exists = math.isfinite(value)
    else:
        raise ValueError(f"Unknown shift mode: {mode}")
    if ladder:
        notes.append(f"truncation radii {', '.join(f'{r:g}' for r, _ in ladder)}")
    logger.info("shift_lower_bound (%s) p=%g: exists=%s value=%.6g", mode, p.p, exists, value)
    return ShiftReport(
        exists=exists,
        criterion_value=value,
        k_sup=k_sup if math.isfinite(k_sup) else None,
        mode=mode,
        truncation=ladder,
        notes=tuple(notes),
    )


def shift_upper_bound(
    fields: Sequence[CoefficientField] | OperatorSpec, p: PExponent, plan: SamplingPlan
) -> ShiftReport:
    """k I d^2/dx^2 - A is dissipative for some k iff ess sup [(1 - s/2) mu_1 + (1 + s/2) mu_m] < inf."""
    op = _diag_op(fields)
    box = op.box
    value, ladder = _truncated(
        _eig_extreme(op, plan, lambda a, b: _upper_expression(a, b, p), "sup"), box, "sup"
    )
    exists = math.isfinite(value)
    notes = []
    metadata: dict[str, float] = {}
    psd = all(
        mu1 >= -REAL_TOL * max(1.0, abs(mum))
        for row in _extreme_eigs(op, _points(op, plan), require_psd=False)
        for mu1, mum, _ in row
    )
    if psd:
        sup_mu, _ = _truncated(_eig_extreme(op, plan, lambda a, b: b, "sup"), box, "sup")
        metadata["sup_mu_m"] = sup_mu
        if math.isfinite(sup_mu) != exists:
            raise ConsistencyError(
                f"sup mu_m = {sup_mu!r} disagrees with the eigenvalue expression {value!r}"
            )
    if ladder:
        notes.append(f"truncation radii {', '.join(f'{r:g}' for r, _ in ladder)}")
    return ShiftReport(
        exists=exists,
        criterion_value=value,
        k_min=value / 2.0 if exists else None,
        mode="upper",
        truncation=ladder,
        notes=tuple(notes),
        metadata=metadata,
    )


# -- sphere product --------------------------------------------------------------


def _check_mu(mu: Sequence[float]) -> Array:
    arr = np.asarray(mu, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("mu must be a nonempty vector")
    if np.any(arr <= 0):
        raise ValueError(f"mu must be positive, got {arr.tolist()}")
    return np.sort(arr)


def sphere_product_max(mu: Sequence[float]) -> float:
    """max over unit w of (sum mu_h w_h^2)(sum w_k^2 / mu_k) = (mu_1 + mu_m)^2 / (4 mu_1 mu_m)."""
    arr = _check_mu(mu)
    return float((arr[0] + arr[-1]) ** 2 / (4.0 * arr[0] * arr[-1]))


def sphere_product_bruteforce(mu: Sequence[float], plan: SamplingPlan) -> float:
    arr = _check_mu(mu)
    w = SplitMix64(plan.seed).unit_vectors(plan.n_directions, arr.size)
    sq = w * w
    vals = (sq @ arr) * (sq @ (1.0 / arr))

    def neg(z: Array) -> float:
        n2 = float(z @ z)
        if n2 == 0:
            return math.inf
        s = z * z / n2
        return -float((s @ arr) * (s @ (1.0 / arr)))

    starts = [w[i] for i in _top_indices(-vals, N_STARTS)]
    _, best = multistart(neg, starts, rounds=plan.refine_iters)
    return max(float(np.max(vals)), -best)


# -- angle -------------------------------------------------------------------------


def _angle_objective(A: Array, p: PExponent, sign: float, thr: float) -> Callable[[Array, Array], Array]:
    """sign * arccot(Q/P) on Xi, written as atan2(P, Q); pairs off Xi score +inf."""

    def f(l: Array, w: Array) -> Array:
        P, Q = pq_batch(A, p, l, w)
        theta = np.arctan2(np.maximum(P, 0.0), Q)
        return np.where(np.hypot(P, Q) > thr, sign * theta, np.inf)

    return f


def system_angle(
    fields: Sequence[CoefficientField] | OperatorSpec, p: PExponent, plan: SamplingPlan
) -> AngleInterval:
    """
    [theta_-, theta_+] with theta_+ = min arccot(Q/P) and theta_- = max arccot(Q/P) - pi
    over Xi_h = {P^2 + Q^2 > 0}, intersected across h. Empty Xi_h leaves [-pi, pi].
    """
    verdict = system_check(fields, p, plan)
    if verdict.status is Status.FAILS:
        raise PreconditionError(
            f"operator is not L^{p.p:g}-dissipative (margin {verdict.margin:.3e})",
            witness=verdict.witness,
        )
    op = _diag_op(fields)
    pts = _points(op, plan)
    blocks = op.blocks_at(pts)
    pairs = PairSamples.draw(op.m, plan)
    out = AngleInterval(-math.pi, math.pi)
    for h in range(op.n):
        upper, lower = math.pi, 0.0
        best: dict[float, tuple[float, int]] = {}
        for i in range(blocks.shape[2]):
            A = blocks[h, h, i]
            thr = 1e-12 * max(1.0, float(np.max(np.abs(A))))
            for sign in (1.0, -1.0):
                vals = _angle_objective(A, p, sign, thr)(pairs.lam, pairs.om)
                k = int(np.argmin(vals))
                if vals[k] < best.get(sign, (math.inf, 0))[0]:
                    best[sign] = (float(vals[k]), i)
        for sign, (_, i) in best.items():
            A = blocks[h, h, i]
            thr = 1e-12 * max(1.0, float(np.max(np.abs(A))))
            found = minimize_pairs(_angle_objective(A, p, sign, thr), pairs, op.m, plan.refine_iters)
            if sign > 0:
                upper = min(upper, found.value)
            else:
                lower = max(lower, -found.value)
        interval = AngleInterval(lower - math.pi, upper)
        logger.debug("system_angle h=%d: [%.6g, %.6g]", h + 1, interval.theta_minus, interval.theta_plus)
        out = out.intersect(interval)
    return out


# -- general two-dimensional systems ------------------------------------------------


def _xi_matrix(blocks: Array, phi: float) -> Array:
    """sum_hk A^{hk} xi_h xi_k for xi = (cos phi, sin phi); blocks is (2, 2, m, m)."""
    xi = (math.cos(phi), math.sin(phi))
    return sum(blocks[h, k] * xi[h] * xi[k] for h in range(2) for k in range(2))


def general2d_necessary(
    blocks: Sequence[Sequence[CoefficientField]] | OperatorSpec,
    p: PExponent,
    plan: SamplingPlan,
    real_frame: bool | None = None,
) -> Verdict:
    """
    Necessary condition for A u = d_h(A^{hk} d_k u), n = 2: P of the matrix
    A^{hk} xi_h xi_k is nonnegative for every real xi. real_frame restricts
    lambda and omega to real vectors (real coefficients, real test fields).
    """
    op = blocks if isinstance(blocks, OperatorSpec) else OperatorSpec.general2d(blocks)
    if op.kind not in (OperatorKind.GENERAL2D, OperatorKind.ELASTICITY) or op.n != 2:
        raise ValueError(f"general2d_necessary needs n = 2 block systems, got n = {op.n}")
    real = op.real_frame if real_frame is None else real_frame
    pts = _points(op, plan)
    table = op.blocks_at(pts)
    pairs = PairSamples.draw(op.m, plan, complex_=not real)
    phis = np.linspace(0.0, math.pi, XI_ANGLES, endpoint=False)
    worst = (math.inf, 0, 0.0)
    total = 0
    for i in range(table.shape[2]):
        for phi in phis:
            B = _xi_matrix(table[:, :, i], float(phi))
            P, _ = pq_batch(B, p, pairs.lam, pairs.om)
            total += P.shape[0]
            k = int(np.argmin(P))
            if P[k] < worst[0]:
                worst = (float(P[k]), i, float(phi))
    _, i, phi0 = worst
    cell = table[:, :, i]
    m = op.m

    def objective(z: Array) -> float:
        B = _xi_matrix(cell, float(z[0]))
        l, w = _unpack(z[1:], m, pairs.complex_)
        return float(pq_batch(B, p, l[None, :], w[None, :])[0][0])

    B0 = _xi_matrix(cell, phi0)
    seed = minimize_pairs(
        lambda l, w: pq_batch(B0, p, l, w)[0], pairs, m, plan.refine_iters, extra=_mix_candidates(B0, real=real)
    )
    z0 = np.concatenate([[phi0], _pack(np.asarray(seed.lam), np.asarray(seed.om), pairs.complex_)])
    z, value = multistart(objective, [z0], rounds=plan.refine_iters)
    if value >= seed.value:
        z, value = z0, seed.value
    lam, om = _unpack(z[1:], m, pairs.complex_)
    phi = float(z[0])
    status, boundary = classify_margin(value, float(np.max(np.abs(table))))
    x = tuple(float(c) for c in pts[min(i, pts.shape[0] - 1)])
    logger.info("general2d_necessary p=%g: %s margin=%.6g", p.p, status.value, value)
    return Verdict(
        status=status,
        margin=value,
        witness=Witness(
            x=x,
            xi=(math.cos(phi), math.sin(phi)),
            lam=tuple(complex(c) for c in lam),
            omega=tuple(complex(c) for c in om),
        ),
        boundary=boundary,
        samples=total,
        necessary_only=True,
        sampled=not op.is_constant,
        notes=("NECESSARY-ONLY",),
    )
