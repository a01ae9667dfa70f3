"""
The plane elasticity operator E u = Lap u + (1 - 2 nu)^{-1} grad div u.

E is L^p-dissipative iff

    (1/2 - 1/p)^2 <= 2 (nu - 1)(2 nu - 1) / (3 - 4 nu)^2,

equivalently 4/(p p') >= 1/(3 - 4 nu)^2. Everything here is closed form; the
only search is the one producing a witness for a failing pair (p, nu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConsistencyError, HypothesisError
from .logging import get_logger
from .systems import PairSamples, minimize_pairs, pq_batch
from .types import (
    ElasticityParams,
    NuSet,
    PExponent,
    PInterval,
    SamplingPlan,
    ShiftReport,
    Status,
    Verdict,
    Witness,
    classify_margin,
)

logger = get_logger(__name__)

FORM_TOL = 1e-12
STRICT_TOL = 1e-12


def _num(nu: float) -> float:
    return 2.0 * (nu - 1.0) * (2.0 * nu - 1.0)


def _den(nu: float) -> float:
    return (3.0 - 4.0 * nu) ** 2


def vecchia_margin(nu: float, p: PExponent) -> float:
    """2(nu - 1)(2 nu - 1)/(3 - 4 nu)^2 - (1/2 - 1/p)^2; at nu = 3/4 the product form num - lhs den."""
    den = _den(nu)
    lhs = p.half_gap**2
    if den == 0.0:
        return _num(nu) - lhs * den
    return _num(nu) / den - lhs


def _witness(params: ElasticityParams, p: PExponent, plan: SamplingPlan) -> Witness:
    # isotropy: A^{hk} xi_h xi_k = I + gamma xi xi^T is a rotation of the xi = (1, 0) case
    B = np.diag([1.0 + params.gamma, 1.0]).astype(complex)
    found = minimize_pairs(
        lambda l, w: pq_batch(B, p, l, w)[0],
        PairSamples.draw(2, plan, complex_=False),
        2,
        plan.refine_iters,
    )
    return Witness(x=(0.0, 0.0), xi=(1.0, 0.0), lam=found.lam, omega=found.om)


def elasticity_check(
    params: ElasticityParams, p: PExponent, plan: SamplingPlan | None = None
) -> Verdict:
    vm = vecchia_margin(params.nu, p)
    den = _den(params.nu)
    if den > 0.0:
        em = p.four_over_ppc - 1.0 / den
        if abs(em - 4.0 * vm) > FORM_TOL * max(1.0, abs(em)):
            raise ConsistencyError(
                f"elasticity forms disagree at nu = {params.nu}, p = {p.p}: {em!r} vs {4.0 * vm!r}"
            )
    status, boundary = classify_margin(vm, 1.0)
    witness = _witness(params, p, plan or SamplingPlan()) if status is Status.FAILS else None
    logger.info("elasticity_check nu=%g p=%g: %s margin=%.6g", params.nu, p.p, status.value, vm)
    return Verdict(status=status, margin=vm, witness=witness, boundary=boundary)


def elasticity_p_interval(params: ElasticityParams) -> PInterval:
    """All p with |1 - 2/p| <= sqrt(1 - 1/(3 - 4 nu)^2); empty when (nu - 1)(2 nu - 1) < 0."""
    num, den = _num(params.nu), _den(params.nu)
    if num < 0.0 or den == 0.0:
        return PInterval(2.0, 2.0, empty=True)
    b = math.sqrt(max(0.0, 1.0 - 1.0 / den))
    return PInterval(2.0 / (1.0 + b), 2.0 / (1.0 - b))


def elasticity_nu_set(p: PExponent) -> NuSet:
    """{nu : |3 - 4 nu| >= sqrt(p p')/2}, without nu = 1/2."""
    s = p.sqrt_ppc / 2.0
    upper, lower = (3.0 - s) / 4.0, (3.0 + s) / 4.0
    return NuSet(upper=upper, lower=lower, upper_closed=upper < 0.5)


def elasticity_shift_lower(params: ElasticityParams, p: PExponent) -> ShiftReport:
    """
    Some k > 0 makes E - k Lap dissipative iff the criterion holds strictly;
    every admissible k satisfies k <= (|3 - 4 nu| - sqrt(p p')/2) / (2 |1 - 2 nu|).
    """
    vm = vecchia_margin(params.nu, p)
    exists = vm > STRICT_TOL
    k_sup = (abs(3.0 - 4.0 * params.nu) - p.sqrt_ppc / 2.0) / (2.0 * abs(1.0 - 2.0 * params.nu))
    notes = ["k <= k_sup is necessary for every admissible k"]
    metadata: dict[str, float] = {}
    if exists:
        k = k_sup / 2.0
        metadata["k"] = k
        metadata["nu_reduced"] = params.nu * (1.0 - k) + k / 2.0
    return ShiftReport(
        exists=exists,
        criterion_value=vm,
        k_sup=k_sup if exists else None,
        mode="positive",
        notes=tuple(notes),
        metadata=metadata,
    )


def elasticity_shift_upper(params: ElasticityParams, p: PExponent) -> ShiftReport:
    """k Lap - E (k < 2) is dissipative for some k iff (1/2 - 1/p)^2 < 2 nu (2 nu - 1)/(1 - 4 nu)^2."""
    nu = params.nu
    if nu == 0.25:
        raise HypothesisError("degenerate denominator: nu = 1/4 makes (1 - 4 nu)^2 vanish")
    direct = 2.0 * nu * (2.0 * nu - 1.0) / (1.0 - 4.0 * nu) ** 2 - p.half_gap**2
    dual = elasticity_shift_lower(ElasticityParams(1.0 - nu), p)
    if (direct > STRICT_TOL) != dual.exists and abs(direct - dual.criterion_value) > 1e-9:
        raise ConsistencyError(
            f"kLap - E at nu = {nu} disagrees with E - kLap at 1 - nu: {direct!r} vs "
            f"{dual.criterion_value!r}"
        )
    return ShiftReport(
        exists=dual.exists,
        criterion_value=direct,
        mode="upper",
        notes=("existence only; no bound on k is reported",),
    )


@dataclass(frozen=True)
class RegionRow:
    nu: float
    interval: PInterval

    @property
    def branch(self) -> str:
        return "below" if self.nu < 0.5 else "above"

    @property
    def strong_elliptic(self) -> bool:
        return ElasticityParams(self.nu).strong_elliptic

    def as_row(self) -> dict[str, object]:
        return {
            "nu": self.nu,
            "p_lo": self.interval.p_lo,
            "p_hi": self.interval.p_hi,
            "empty": self.interval.empty,
            "branch": self.branch,
            "strong_elliptic": self.strong_elliptic,
        }


def region_grid(nu_min: float, nu_max: float, steps: int) -> list[float]:
    """
    steps Poisson ratios over [nu_min, nu_max]. A range crossing 1/2 is split
    there; each side gets its share of the points and 1/2 itself is left out.
    """
    if not nu_min < nu_max:
        raise ValueError(f"Empty Poisson ratio range [{nu_min}, {nu_max}]")
    if not nu_min < 0.5 < nu_max:
        return [float(v) for v in np.linspace(nu_min, nu_max, steps) if v != 0.5]
    below = max(2, round(steps * (0.5 - nu_min) / (nu_max - nu_min)))
    above = max(2, steps - below)
    left = np.linspace(nu_min, 0.5, below, endpoint=False)
    right = np.linspace(0.5, nu_max, above + 1)[1:]
    return [float(v) for v in np.concatenate([left, right])]


def elasticity_region(nu_values: Iterable[float]) -> tuple[list[RegionRow], list[str]]:
    """
    Admissible p-intervals along a list of Poisson ratios, the nu < 1/2 branch
    first. nu = 1/2 is skipped; ratios in (1/2, 1] are flagged as not strongly
    elliptic.
    """
    below, above, notes = [], [], []
    for nu in nu_values:
        if nu == 0.5:
            notes.append("nu = 1/2 skipped: operator undefined")
            continue
        row = RegionRow(nu, elasticity_p_interval(ElasticityParams(nu)))
        (below if row.branch == "below" else above).append(row)
    if below and above:
        notes.append(f"split at nu = 1/2: {len(below)} rows with nu < 1/2, {len(above)} with nu > 1/2")
    weak = [r.nu for r in above if not r.strong_elliptic]
    if weak:
        notes.append(
            f"{len(weak)} rows in 1/2 < nu <= 1 ({min(weak):g} to {max(weak):g}): not strongly elliptic"
        )
    return below + above, notes
