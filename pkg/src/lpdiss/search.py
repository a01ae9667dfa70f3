"""
Derivative-free local refinement.

Sampled extrema are polished by golden-section line searches along one
coordinate at a time; the objective is always minimised (callers negate for
maxima). Several starts are refined together: every golden-section step
evaluates one point per start in a single batched call.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2
# a start counts as converged after two rounds without this relative gain
ROUND_FTOL = 1e-13
STALL_ROUNDS = 2

Objective = Callable[[np.ndarray], float]
BatchObjective = Callable[[np.ndarray], np.ndarray]


def _finite(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.where(np.isfinite(values), values, math.inf)


def golden_section_batch(
    f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray, tol: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section search on k brackets at once; f maps k abscissae to k values."""
    a, b = np.minimum(a, b).astype(float), np.maximum(a, b).astype(float)
    h = b - a
    tol = np.broadcast_to(np.asarray(tol, dtype=float), h.shape)
    wide = h > tol
    if not np.any(wide):
        x = 0.5 * (a + b)
        return x, _finite(f(x))
    steps = int(math.ceil(float(np.max(np.log(tol[wide] / h[wide]) / math.log(INV_PHI)))))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = _finite(f(c)), _finite(f(d))
    for _ in range(steps - 1):
        left = yc < yd
        h = h * INV_PHI
        a_next = np.where(left, a, c)
        c_next = np.where(left, a + INV_PHI_SQUARE * h, d)
        d_next = np.where(left, c, a_next + INV_PHI * h)
        y = _finite(f(np.where(left, c_next, d_next)))
        yc, yd = np.where(left, y, yd), np.where(left, yc, y)
        a, c, d = a_next, c_next, d_next
    take_c = yc < yd
    return np.where(take_c, c, d), np.where(take_c, yc, yd)


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10
) -> tuple[float, float]:
    """Minimiser and value of f on [a, b], assuming one local minimum."""
    x, fx = golden_section_batch(
        lambda t: np.array([f(float(t[0]))]), np.array([a]), np.array([b]), tol
    )
    return float(x[0]), float(fx[0])


def refine_batch(
    f: BatchObjective,
    starts: np.ndarray,
    rounds: int = 40,
    span: float = 0.5,
    line_tol: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Coordinate-wise golden-section descent from every row of starts.

    Each row and coordinate keeps its own bracket half width; it shrinks when
    the line minimum lands well inside the bracket and grows when it hits the
    edge. A move is only accepted if it lowers f, so no row gets worse.
    """
    Z = np.array(starts, dtype=float, ndmin=2)
    best = _finite(f(Z))
    spans = np.full(Z.shape, span)
    stalled = 0
    for _ in range(rounds):
        before = best.copy()
        for j in range(Z.shape[1]):
            w = spans[:, j].copy()
            base = Z[:, j].copy()

            def line(t: np.ndarray) -> np.ndarray:
                trial = Z.copy()
                trial[:, j] = base + t
                return f(trial)

            t, val = golden_section_batch(line, -w, w, tol=line_tol * w)
            better = val < best
            Z[:, j] = np.where(better, base + t, base)
            best = np.where(better, val, best)
            moved = np.where(np.abs(t) > 0.8 * w, w * 1.5, np.maximum(np.abs(t) * 2.0, w * 0.5))
            spans[:, j] = np.where(better, moved, w * 0.5)
        gain = np.where(np.isfinite(best), before - best, 0.0)
        if np.all(gain <= ROUND_FTOL * np.maximum(1.0, np.abs(np.where(np.isfinite(best), best, 0.0)))):
            stalled += 1
            if stalled >= STALL_ROUNDS:
                break
        else:
            stalled = 0
    return Z, best


def refine_coordinates(
    f: Objective,
    z0: Sequence[float],
    rounds: int = 40,
    span: float = 0.5,
    line_tol: float = 1e-3,
) -> tuple[np.ndarray, float]:
    Z, best = refine_batch(_rowwise(f), np.asarray(z0, dtype=float)[None, :], rounds, span, line_tol)
    return Z[0], float(best[0])


def _rowwise(f: Objective) -> BatchObjective:
    return lambda Z: np.array([f(z) for z in Z], dtype=float)


def multistart(
    f: Objective | BatchObjective,
    starts: Sequence[Sequence[float]],
    rounds: int,
    span: float = 0.5,
    batched: bool = False,
) -> tuple[np.ndarray, float]:
    """
    Refine from every start and keep the lowest; ties go to the earliest start.
    With batched=True, f takes a (k, d) array and returns k values.
    """
    if len(starts) == 0:
        raise ValueError("multistart needs at least one start")
    fb = f if batched else _rowwise(f)
    Z, vals = refine_batch(fb, np.asarray(starts, dtype=float), rounds=rounds, span=span)
    i = int(np.argmin(vals))
    return Z[i], float(vals[i])
