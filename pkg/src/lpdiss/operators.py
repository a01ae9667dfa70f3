"""
Operator classes.

Every operator is carried as a divergence-form system
A u = d_h(A^{hk}(x) d_k u), h, k = 1..n, with m x m blocks A^{hk}:

  scalar      m = 1, A^{hk} = a_hk
  diag        A^{hk} = delta_hk A^h
  general2d   n = 2, arbitrary blocks
  elasticity  n = m = 2, a^{hk}_ij = delta_hk delta_ij + gamma delta_hi delta_kj
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .fields import CoefficientField, constant_field, field_from_dict
from .types import DomainBox, ElasticityParams, OperatorKind


def elasticity_blocks(params: ElasticityParams) -> list[list[CoefficientField]]:
    """2 x 2 constant blocks of the elasticity operator (real frame)."""
    g = params.gamma
    blocks: list[list[CoefficientField]] = []
    for h in range(2):
        row = []
        for k in range(2):
            M = np.zeros((2, 2))
            if h == k:
                M += np.eye(2)
            M[h, k] += g
            row.append(constant_field(M, n=2))
        blocks.append(row)
    return blocks


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    kind: OperatorKind
    n: int
    m: int
    fields: tuple[CoefficientField, ...] = ()
    elasticity: ElasticityParams | None = None

    @classmethod
    def scalar(cls, f: CoefficientField) -> "OperatorSpec":
        if f.m != f.n:
            raise ValueError(f"Scalar operator needs an n x n field, got m = {f.m}, n = {f.n}")
        return cls(OperatorKind.SCALAR, f.n, 1, (f,))

    @classmethod
    def diagonal(cls, fields: Sequence[CoefficientField]) -> "OperatorSpec":
        fields = tuple(fields)
        if not fields:
            raise ValueError("A diagonal system needs at least one field")
        n, m = len(fields), fields[0].m
        for h, f in enumerate(fields):
            if f.m != m:
                raise ValueError(f"Field {h + 1} has size {f.m}, expected {m}")
            if f.n != n and not f.is_constant:
                raise ValueError(f"Field {h + 1} lives in dimension {f.n}, expected {n}")
        return cls(OperatorKind.DIAGONAL, n, m, fields)

    @classmethod
    def general2d(cls, blocks: Sequence[Sequence[CoefficientField]]) -> "OperatorSpec":
        if len(blocks) != 2 or any(len(row) != 2 for row in blocks):
            raise ValueError("general2d needs a 2 x 2 table of blocks")
        flat = tuple(f for row in blocks for f in row)
        m = flat[0].m
        if any(f.m != m for f in flat):
            raise ValueError("All blocks must share the matrix size")
        return cls(OperatorKind.GENERAL2D, 2, m, flat)

    @classmethod
    def elastic(cls, params: ElasticityParams) -> "OperatorSpec":
        flat = tuple(f for row in elasticity_blocks(params) for f in row)
        return cls(OperatorKind.ELASTICITY, 2, 2, flat, params)

    @property
    def real_frame(self) -> bool:
        return self.kind is OperatorKind.ELASTICITY

    @property
    def is_constant(self) -> bool:
        return all(f.is_constant for f in self.fields)

    @property
    def box(self) -> DomainBox | None:
        for f in self.fields:
            if f.box is not None:
                return f.box
        return None

    def blocks(self) -> list[list[CoefficientField]]:
        if self.kind in (OperatorKind.GENERAL2D, OperatorKind.ELASTICITY):
            return [list(self.fields[:2]), list(self.fields[2:])]
        raise ValueError(f"{self.kind.value} operators have no block table")

    def blocks_at(self, points: Any) -> np.ndarray:
        """
        Blocks A^{hk} at each point, shape (n, n, N, m, m); N collapses to 1
        when every field is constant.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        if self.is_constant:
            pts = pts[:1] if pts.shape[0] else np.zeros((1, self.n))
        count = pts.shape[0]
        out = np.zeros((self.n, self.n, count, self.m, self.m), dtype=complex)
        if self.kind is OperatorKind.SCALAR:
            vals = self.fields[0].values_at(pts)
            for h in range(self.n):
                for k in range(self.n):
                    out[h, k, :, 0, 0] = vals[:, h, k]
        elif self.kind is OperatorKind.DIAGONAL:
            for h, f in enumerate(self.fields):
                out[h, h] = f.values_at(pts if f.n == self.n else np.zeros((count, f.n)))
        else:
            for idx, f in enumerate(self.fields):
                out[idx // 2, idx % 2] = f.values_at(pts)
        return out


def load_operator(kind: str, path: str | Path | None, nu: float | None = None) -> OperatorSpec:
    """
    Build an operator from the CLI's --op/--file/--nu triple.

    File layouts: a single field object (scalar, or a diagonal system with
    n = 1), {"fields": [...]} for diagonal systems, {"blocks": [[a, b], [c, d]]}
    for general2d.
    """
    if kind == OperatorKind.ELASTICITY.value:
        if nu is None:
            raise ValueError("--op elasticity needs --nu")
        return OperatorSpec.elastic(ElasticityParams(nu))
    if path is None:
        raise ValueError(f"--op {kind} needs --file")
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if kind == OperatorKind.SCALAR.value:
        return OperatorSpec.scalar(field_from_dict(data))
    if kind == OperatorKind.DIAGONAL.value:
        raw = data["fields"] if "fields" in data else [data]
        return OperatorSpec.diagonal([field_from_dict(d) for d in raw])
    if kind == OperatorKind.GENERAL2D.value:
        return OperatorSpec.general2d([[field_from_dict(d) for d in row] for row in data["blocks"]])
    raise ValueError(f"Unknown operator kind: {kind}")
