"""
The scalar operator A = div(A(x) grad) with complex n x n coefficients.

A is L^p-dissipative iff

    |p - 2| |<Im A xi, xi>| <= 2 sqrt(p - 1) <Re A xi, xi>

for almost every x and every real xi. For a fixed x the left-hand minimum over
unit xi is min(eigmin(c ReS - d ImS), eigmin(c ReS + d ImS)), so eigenvectors of
those two matrices join the sampled directions as candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, PreconditionError
from .fields import CoefficientField
from .linalg import arccot, arccot_interval, sym_eigs
from .logging import get_logger
from .sampling import SplitMix64, corner_probes, sample_points
from .search import multistart
from .types import (
    AngleInterval,
    PExponent,
    PInterval,
    SamplingPlan,
    ScalarAngleReport,
    Status,
    Verdict,
    Witness,
    classify_margin,
)

logger = get_logger(__name__)

IM_SYMMETRY_TOL = 1e-10
P2_SWITCH = 1e-12
N_STARTS = 3


@dataclass(frozen=True, eq=False)
class _Slice:
    x: tuple[float, ...]
    re_sym: np.ndarray
    im: np.ndarray
    scale: float


def x_candidates(f: CoefficientField, plan: SamplingPlan) -> list[tuple[float, ...]]:
    """Spatial sample set: one point for constant fields, else sampled points plus corner probes."""
    if f.is_constant:
        return [f.box.center if f.box is not None else (0.0,) * f.n]
    if f.box is None:
        raise ValueError("Non-constant fields need a domain box")
    return sample_points(f.box, plan) + corner_probes(f.box)


def _slices(f: CoefficientField, plan: SamplingPlan) -> list[_Slice]:
    if f.m != f.n:
        raise ValueError(f"Scalar coefficients must be n x n, got m = {f.m}, n = {f.n}")
    xs = x_candidates(f, plan)
    mats = f.values_at(np.asarray(xs))
    out = []
    for x, A in zip(xs, mats):
        im = A.imag
        scale = float(np.max(np.abs(A)))
        if np.max(np.abs(im - im.T)) > IM_SYMMETRY_TOL * max(1.0, scale):
            raise HypothesisError(f"hypothesis violated: Im A is not symmetric at x = {x}", x=x)
        out.append(_Slice(x, 0.5 * (A.real + A.real.T), 0.5 * (im + im.T), scale))
    return out


def _slack(sl: _Slice, xi: np.ndarray, c: float, d: float) -> np.ndarray:
    """c <ReS xi, xi> - d |<Im xi, xi>| for unit rows of xi."""
    re_form = np.einsum("ki,ij,kj->k", xi, sl.re_sym, xi)
    im_form = np.einsum("ki,ij,kj->k", xi, sl.im, xi)
    return c * re_form - d * np.abs(im_form)


def _unit(z: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(z))
    return z / norm if norm > 0 else z


def _eigen_candidates(sl: _Slice, c: float, d: float) -> np.ndarray:
    cands = []
    for sign in (1.0, -1.0):
        eig = sym_eigs(c * sl.re_sym - sign * d * sl.im)
        assert eig.vectors is not None
        cands.append(eig.vectors[:, 0])
    return np.array(cands)


def scalar_check(f: CoefficientField, p: PExponent, plan: SamplingPlan) -> Verdict:
    c, d = 2.0 * math.sqrt(p.p - 1.0), abs(p.p - 2.0)
    slices = _slices(f, plan)
    gen = SplitMix64(plan.seed)
    worst = (math.inf, None, None)   # (slack, slice, xi)
    samples = 0
    for sl in slices:
        xi = np.vstack([_eigen_candidates(sl, c, d), gen.unit_vectors(plan.n_directions, f.n)])
        vals = _slack(sl, xi, c, d)
        samples += vals.shape[0]
        k = int(np.argmin(vals))
        if vals[k] < worst[0]:
            worst = (float(vals[k]), sl, xi[k])
    margin, sl, xi0 = worst
    assert sl is not None and xi0 is not None

    def objective(z: np.ndarray) -> float:
        return float(_slack(sl, _unit(z)[None, :], c, d)[0])

    z, refined = multistart(objective, [xi0], rounds=plan.refine_iters)
    if refined < margin:
        margin, xi0 = refined, _unit(z)
    scale = max(s.scale for s in slices)
    status, boundary = classify_margin(margin, scale)
    logger.info("scalar_check p=%g: %s margin=%.6g", p.p, status.value, margin)
    return Verdict(
        status=status,
        margin=margin,
        witness=Witness(x=sl.x, xi=tuple(float(v) for v in xi0)),
        boundary=boundary,
        samples=samples,
        sampled=not f.is_constant,
    )


def _form_ratios(sl: _Slice, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    re_form = np.einsum("ki,ij,kj->k", xi, sl.re_sym, xi)
    im_form = np.einsum("ki,ij,kj->k", xi, sl.im, xi)
    return re_form, im_form


def _lambda_candidates(sl: _Slice) -> np.ndarray:
    """Generalised eigenvectors of (Im, ReS) when ReS > 0, plus near-null directions of ReS."""
    eig = sym_eigs(sl.re_sym)
    assert eig.vectors is not None
    thr = 1e-12 * max(1.0, sl.scale)
    values = np.asarray(eig.values)
    cands = [eig.vectors[:, i] for i in range(len(values)) if abs(values[i]) <= thr]
    if values[0] > thr:
        W = eig.vectors / np.sqrt(values)[None, :]
        inner = sym_eigs(W.T @ sl.im @ W)
        assert inner.vectors is not None
        for i in (0, -1):
            cands.append(_unit(W @ inner.vectors[:, i]))
    return np.array(cands) if cands else np.zeros((0, sl.re_sym.shape[0]))


def scalar_lambda_bounds(
    f: CoefficientField, plan: SamplingPlan
) -> tuple[float, float, bool]:
    """
    Sampled inf and sup of <Im A xi, xi> / <Re A xi, xi>.

    Pairs with a vanishing real form and nonzero imaginary form count as
    +-inf. xi_empty is set when no pair has a positive denominator.
    """
    slices = _slices(f, plan)
    gen = SplitMix64(plan.seed)
    lam1, lam2 = math.inf, -math.inf
    xi_empty = True
    best: dict[str, tuple[float, _Slice, np.ndarray]] = {}
    for sl in slices:
        xi = np.vstack([_lambda_candidates(sl), gen.unit_vectors(plan.n_directions, f.n)])
        re_form, im_form = _form_ratios(sl, xi)
        thr = 1e-12 * max(1.0, sl.scale)
        positive = re_form > thr
        degenerate = (~positive) & (np.abs(re_form) <= thr) & (np.abs(im_form) > thr)
        if np.any(degenerate & (im_form > 0)):
            lam2 = math.inf
        if np.any(degenerate & (im_form < 0)):
            lam1 = -math.inf
        if np.any(positive):
            xi_empty = False
            ratios = np.where(positive, im_form / np.where(positive, re_form, 1.0), np.nan)
            lo, hi = int(np.nanargmin(ratios)), int(np.nanargmax(ratios))
            if ratios[lo] < best.get("lo", (math.inf,))[0]:
                best["lo"] = (float(ratios[lo]), sl, xi[lo])
            if -ratios[hi] < best.get("hi", (math.inf,))[0]:
                best["hi"] = (float(-ratios[hi]), sl, xi[hi])

    for key, sign in (("lo", 1.0), ("hi", -1.0)):
        if key not in best:
            continue
        val, sl, xi0 = best[key]

        def objective(z: np.ndarray, sl: _Slice = sl, sign: float = sign) -> float:
            re_form, im_form = _form_ratios(sl, _unit(z)[None, :])
            if re_form[0] <= 1e-12 * max(1.0, sl.scale):
                return math.inf
            return float(sign * im_form[0] / re_form[0])

        _, refined = multistart(objective, [xi0], rounds=plan.refine_iters)
        val = min(val, refined)
        if key == "lo" and lam1 != -math.inf:
            lam1 = min(lam1, val)
        if key == "hi" and lam2 != math.inf:
            lam2 = max(lam2, -val)
    return lam1, lam2, xi_empty


def _angle_from_lambdas(lam1: float, lam2: float, p: PExponent) -> AngleInterval:
    if math.isinf(lam1) and lam1 > 0 and math.isinf(lam2) and lam2 < 0:
        return AngleInterval(-math.pi, math.pi)
    if abs(p.p - 2.0) < P2_SWITCH:
        return arccot_interval(lam1, lam2)
    c, d = 2.0 * math.sqrt(p.p - 1.0), abs(p.p - 2.0)
    q = p.p * p.p / d
    if lam1 == math.inf:
        y_minus = c / d
    elif c + d * lam1 <= 0.0:
        y_minus = -math.inf
    else:
        y_minus = c / d - q / (c + d * lam1)
    if lam2 == -math.inf:
        y_plus = -c / d
    elif c - d * lam2 <= 0.0:
        y_plus = math.inf
    else:
        y_plus = -c / d + q / (c - d * lam2)
    lo, hi = arccot(y_minus) - math.pi, arccot(y_plus)
    if lo > hi:
        return AngleInterval(lo, hi, empty=True)
    return AngleInterval(lo, hi)


def scalar_angle(f: CoefficientField, p: PExponent, plan: SamplingPlan) -> ScalarAngleReport:
    """Sharp angle of dissipativity [theta_-, theta_+] of a dissipative scalar operator."""
    verdict = scalar_check(f, p, plan)
    if verdict.status is Status.FAILS:
        raise PreconditionError(
            f"operator is not L^{p.p:g}-dissipative (margin {verdict.margin:.3e})",
            witness=verdict.witness,
        )
    for x in x_candidates(f, plan)[:1]:
        A = f.at(x)
        if np.max(np.abs(A.real - A.real.T)) > 1e-10 * max(1.0, float(np.max(np.abs(A)))):
            logger.warning("Re A is not symmetric at x = %s; angle formulas assume symmetry", x)
    lam1, lam2, xi_empty = scalar_lambda_bounds(f, plan)
    interval = _angle_from_lambdas(lam1, lam2, p)
    return ScalarAngleReport(lam1, lam2, interval, xi_empty)


def real_scalar_angle(p: PExponent) -> AngleInterval:
    """|arg z| <= arctan(2 sqrt(p - 1) / |p - 2|), independent of the real operator."""
    half = math.atan2(2.0 * math.sqrt(p.p - 1.0), abs(p.p - 2.0))
    return AngleInterval(-half, half)


def _exact_margin(slices: list[_Slice], p: float) -> float:
    c, d = 2.0 * math.sqrt(p - 1.0), abs(p - 2.0)
    out = math.inf
    for sl in slices:
        for sign in (1.0, -1.0):
            out = min(out, sym_eigs(c * sl.re_sym - sign * d * sl.im).smallest)
    return out


def scalar_p_interval(f: CoefficientField, plan: SamplingPlan, tol: float = 1e-9) -> PInterval:
    """
    The set of p where the scalar condition holds at every sampled x.

    The condition reads |p - 2| / sqrt(p - 1) <= const, so the set is an
    interval around 2; both ends are located by bisection.
    """
    slices = _slices(f, plan)
    scale = max(s.scale for s in slices)
    thr = 1e-12 * max(1.0, scale)

    def holds(p: float) -> bool:
        return _exact_margin(slices, p) >= -thr

    if not holds(2.0):
        return PInterval(2.0, 2.0, empty=True)

    def bisect(good: float, bad: float) -> float:
        while abs(bad - good) > tol * max(1.0, abs(good)):
            mid = 0.5 * (good + bad)
            if holds(mid):
                good = mid
            else:
                bad = mid
        return good

    near_one = 1.0 + 1e-12
    if holds(near_one):
        p_lo, closed_lo = 1.0, False
    else:
        p_lo, closed_lo = bisect(2.0, near_one), True
    bad = 4.0
    while holds(bad) and bad < 1e15:
        bad *= 4.0
    if holds(bad):
        p_hi, closed_hi = math.inf, False
    else:
        p_hi, closed_hi = bisect(2.0, bad), True
    return PInterval(p_lo, p_hi, closed_lo, closed_hi)
