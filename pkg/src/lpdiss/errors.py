from __future__ import annotations

from typing import Any


class DissipativityError(Exception):
    """Base class for every error raised by lpdiss."""


class ExprParseError(DissipativityError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class HypothesisError(DissipativityError, ValueError):
    """A standing hypothesis of a criterion does not hold for the input."""

    def __init__(self, message: str, x: Any = None, h: int | None = None):
        super().__init__(message)
        self.x = x
        self.h = h


class PreconditionError(DissipativityError):
    """Raised when an angle is requested for an operator that is not dissipative."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class ConvergenceError(DissipativityError, ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class ConsistencyError(DissipativityError, AssertionError):
    """Two independent evaluations of the same quantity disagree."""
