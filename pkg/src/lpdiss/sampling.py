"""
Deterministic sampling.

SplitMix64 drives everything: the state advances by a fixed odd increment and
each state is scrambled by two xor-shift-multiply rounds. Output is identical
on every platform because only 64-bit unsigned integer arithmetic is used.
"""

from __future__ import annotations

import math

import numpy as np

from .types import DomainBox, SamplingPlan

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

_U = np.uint64


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seeded 64-bit generator with vectorised draws."""

    def __init__(self, seed: int = 0):
        if not (0 <= seed <= MASK64):
            raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def raw(self, k: int) -> np.ndarray:
        """The next k outputs as a uint64 array."""
        if k <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, k + 1, dtype=np.uint64) * _U(GOLDEN)
        z = steps + _U(self._state)
        self._state = (self._state + k * GOLDEN) & MASK64
        z = (z ^ (z >> _U(30))) * _U(MIX1)
        z = (z ^ (z >> _U(27))) * _U(MIX2)
        return z ^ (z >> _U(31))

    def uniform(self, k: int) -> np.ndarray:
        """k floats in [0, 1) built from the top 53 bits."""
        return (self.raw(k) >> _U(11)).astype(np.float64) * 2.0**-53

    def normal(self, k: int) -> np.ndarray:
        """k standard normals by the Box-Muller transform."""
        pairs = (k + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = r * np.cos(angle)
        out[:, 1] = r * np.sin(angle)
        return out.reshape(-1)[:k]

    def unit_vectors(self, count: int, dim: int, complex_: bool = False) -> np.ndarray:
        """count rows uniformly distributed on the unit sphere of R^dim or C^dim."""
        if complex_:
            g = self.normal(2 * count * dim).reshape(count, 2, dim)
            vecs = g[:, 0, :] + 1j * g[:, 1, :]
        else:
            vecs = self.normal(count * dim).reshape(count, dim)
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return vecs / norms


def sample_points(box: DomainBox, plan: SamplingPlan) -> list[tuple[float, ...]]:
    """plan.n_points uniform points of the box, reproducible bit for bit."""
    gen = SplitMix64(plan.seed)
    u = gen.uniform(plan.n_points * box.n).reshape(plan.n_points, box.n)
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    pts = lo + u * (hi - lo)
    return [tuple(float(c) for c in row) for row in pts]


def corner_probes(box: DomainBox, inset: float = 1e-9) -> list[tuple[float, ...]]:
    """Box vertices pulled inside by a relative inset; extrema of monotone fields sit there."""
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    a = lo + inset * (hi - lo)
    b = hi - inset * (hi - lo)
    out = []
    for mask in range(1 << box.n):
        out.append(tuple(float(b[k] if mask >> k & 1 else a[k]) for k in range(box.n)))
    return out
