from __future__ import annotations

# All result carriers are frozen dataclasses: criteria are pure functions and
# their outputs are shared between the CLI report writer and the oracles.
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Literal

import numpy as np

from .errors import HypothesisError

ShiftMode = Literal["positive", "real", "nonnegative"]
ReportFormat = Literal["json", "csv"]

UINT64_MAX = (1 << 64) - 1


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDETERMINED = "undetermined"


class OperatorKind(str, Enum):
    SCALAR = "scalar"
    DIAGONAL = "diag"
    GENERAL2D = "general2d"
    ELASTICITY = "elasticity"


@dataclass(frozen=True)
class PExponent:
    p: float

    def __post_init__(self) -> None:
        if not (1.0 < self.p < math.inf):
            raise ValueError(f"Exponent p must lie in (1, inf), got {self.p}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def cp(self) -> float:
        return (1.0 - 2.0 / self.p) ** 2

    @property
    def commutator(self) -> float:
        # coefficient (1 - 2/p) of the commutator term
        return 1.0 - 2.0 / self.p

    @property
    def four_over_ppc(self) -> float:
        return 4.0 * (self.p - 1.0) / (self.p * self.p)

    @property
    def sqrt_ppc(self) -> float:
        return self.p / math.sqrt(self.p - 1.0)

    @property
    def half_gap(self) -> float:
        """|1/2 - 1/p|, the quantity every symmetric criterion depends on."""
        return abs(0.5 - 1.0 / self.p)

    def conjugate(self) -> "PExponent":
        return PExponent(self.p_conj)


@dataclass(frozen=True)
class SamplingPlan:
    seed: int = 0
    n_points: int = 64
    n_directions: int = 2000
    refine_iters: int = 40

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= UINT64_MAX):
            raise ValueError(f"Seed must be an unsigned 64-bit integer, got {self.seed}")
        for name in ("n_points", "n_directions", "refine_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class DomainBox:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    # ends flagged infinite are truncated at lo/hi; the verdict reports the radius
    infinite_lo: tuple[bool, ...] = ()
    infinite_hi: tuple[bool, ...] = ()

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("Box bounds must be nonempty and of equal length")
        for k, (a, b) in enumerate(zip(self.lo, self.hi)):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"Box axis {k} needs finite lo < hi, got ({a}, {b})")
        if not self.infinite_lo:
            object.__setattr__(self, "infinite_lo", (False,) * self.n)
        if not self.infinite_hi:
            object.__setattr__(self, "infinite_hi", (False,) * self.n)
        if len(self.infinite_lo) != self.n or len(self.infinite_hi) != self.n:
            raise ValueError("Infinite-end flags must match the box dimension")

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def truncated(self) -> bool:
        return any(self.infinite_lo) or any(self.infinite_hi)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def contains(self, x: Any, rtol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n:
            return False
        for k in range(self.n):
            slack = rtol * max(1.0, abs(self.lo[k]), abs(self.hi[k]))
            if x[k] < self.lo[k] - slack or x[k] > self.hi[k] + slack:
                return False
        return True

    def with_truncation(self, radius: float) -> "DomainBox":
        """Move every infinite end to +-radius (finite ends are kept)."""
        lo = tuple(-radius if inf else a for a, inf in zip(self.lo, self.infinite_lo))
        hi = tuple(radius if inf else b for b, inf in zip(self.hi, self.infinite_hi))
        return DomainBox(lo, hi, self.infinite_lo, self.infinite_hi)

    def truncation_radius(self) -> float | None:
        ends = [abs(a) for a, inf in zip(self.lo, self.infinite_lo) if inf]
        ends += [abs(b) for b, inf in zip(self.hi, self.infinite_hi) if inf]
        return max(ends) if ends else None


@dataclass(frozen=True)
class AngleInterval:
    theta_minus: float
    theta_plus: float
    empty: bool = False

    def __post_init__(self) -> None:
        if math.isnan(self.theta_minus) or math.isnan(self.theta_plus):
            raise ValueError("Angle bounds must not be NaN")
        if not self.empty and self.theta_minus > self.theta_plus:
            raise ValueError(
                f"theta_minus {self.theta_minus} exceeds theta_plus {self.theta_plus}"
            )

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.theta_plus - self.theta_minus

    def contains(self, theta: float) -> bool:
        return not self.empty and self.theta_minus <= theta <= self.theta_plus

    def intersect(self, other: "AngleInterval") -> "AngleInterval":
        lo = max(self.theta_minus, other.theta_minus)
        hi = min(self.theta_plus, other.theta_plus)
        if self.empty or other.empty or lo > hi:
            return AngleInterval(lo, hi, empty=True)
        return AngleInterval(lo, hi)

    def to_dict(self) -> dict[str, Any]:
        return {"theta_minus": self.theta_minus, "theta_plus": self.theta_plus, "empty": self.empty}


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    values: tuple[float, ...]
    residual: float
    vectors: np.ndarray | None = field(default=None, repr=False)  # columns, same order

    @property
    def smallest(self) -> float:
        return self.values[0]

    @property
    def largest(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class PQValue:
    p_val: float
    q_val: float


@dataclass(frozen=True)
class Witness:
    x: tuple[float, ...]
    h: int | None = None
    xi: tuple[float, ...] | None = None
    lam: tuple[complex, ...] | None = None
    omega: tuple[complex, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        def cvec(v: tuple[complex, ...] | None) -> list[list[float]] | None:
            return None if v is None else [[float(z.real), float(z.imag)] for z in v]

        return {
            "x": list(self.x),
            "h": self.h,
            "xi": None if self.xi is None else list(self.xi),
            "lambda": cvec(self.lam),
            "omega": cvec(self.omega),
        }


@dataclass(frozen=True)
class Verdict:
    status: Status
    margin: float
    witness: Witness | None = None
    boundary: bool = False           # |margin| within the boundary tolerance
    samples: int = 0
    necessary_only: bool = False
    sampled: bool = False            # verdict only covers the sampled x set
    per_h: tuple["Verdict", ...] = ()
    notes: tuple[str, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "margin": self.margin,
            "boundary": self.boundary,
            "samples": self.samples,
            "necessary_only": self.necessary_only,
            "sampled": self.sampled,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "per_h": [v.to_dict() for v in self.per_h],
        }


@dataclass(frozen=True)
class PInterval:
    p_lo: float
    p_hi: float
    closed_lo: bool = True
    closed_hi: bool = True
    empty: bool = False

    def contains(self, p: float) -> bool:
        if self.empty:
            return False
        above = p >= self.p_lo if self.closed_lo else p > self.p_lo
        below = p <= self.p_hi if self.closed_hi else p < self.p_hi
        return above and below

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_lo": self.p_lo,
            "p_hi": self.p_hi,
            "closed_lo": self.closed_lo,
            "closed_hi": self.closed_hi,
            "empty": self.empty,
        }


@dataclass(frozen=True)
class ShiftReport:
    exists: bool
    criterion_value: float
    k_sup: float | None = None     # largest admissible k (lower-bound family)
    k_min: float | None = None     # smallest admissible k (upper-bound family)
    mode: str = "positive"
    truncation: tuple[tuple[float, float], ...] = ()
    notes: tuple[str, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "exists": self.exists,
            "criterion_value": self.criterion_value,
            "k_sup": self.k_sup,
            "k_min": self.k_min,
            "mode": self.mode,
            "truncation": [list(t) for t in self.truncation],
        }


@dataclass(frozen=True)
class ScalarAngleReport:
    lambda1: float
    lambda2: float
    interval: AngleInterval
    xi_empty: bool


@dataclass(frozen=True)
class ElasticityParams:
    nu: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.nu):
            raise ValueError(f"Poisson ratio must be finite, got {self.nu}")
        if self.nu == 0.5:
            raise HypothesisError("Poisson ratio 1/2 leaves the elasticity operator undefined")

    @property
    def gamma(self) -> float:
        return 1.0 / (1.0 - 2.0 * self.nu)

    @property
    def strong_elliptic(self) -> bool:
        return self.nu > 1.0 or self.nu < 0.5


@dataclass(frozen=True)
class NuSet:
    """Union of rays (-inf, upper] and [lower, inf) of admissible Poisson ratios."""

    upper: float
    lower: float
    upper_closed: bool = True

    def contains(self, nu: float) -> bool:
        if nu == 0.5:
            return False
        left = nu <= self.upper if self.upper_closed else nu < self.upper
        return left or nu >= self.lower

    def to_dict(self) -> dict[str, Any]:
        return {"upper": self.upper, "upper_closed": self.upper_closed, "lower": self.lower}


BOUNDARY_RTOL = 1e-9


def classify_margin(margin: float, scale: float) -> tuple[Status, bool]:
    """Status and boundary flag for a non-strict condition with the given slack."""
    tol = BOUNDARY_RTOL * max(1.0, scale)
    if margin < -tol:
        return Status.FAILS, False
    return Status.HOLDS, abs(margin) <= tol
