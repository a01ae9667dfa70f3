"""
Coefficient fields x -> A(x).

Three kinds: a constant matrix, an m x m table of parsed expressions on a box,
or matrices sampled at scattered points (nearest-neighbour lookup, ties to the
lowest index). Evaluation is vectorised over an (N, n) array of points.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .expr import Ast, evaluate, parse_expr, print_expr
from .linalg import as_matrix
from .types import DomainBox


class FieldKind(str, Enum):
    CONSTANT = "constant"
    EXPRESSION = "expression"
    GRID = "grid"


@dataclass(frozen=True, eq=False)
class CoefficientField:
    kind: FieldKind
    m: int
    n: int
    matrix: np.ndarray | None = None                 # constant kind
    entries: tuple[tuple[Ast, ...], ...] | None = None  # expression kind
    box: DomainBox | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    points: np.ndarray | None = None                 # grid kind, (S, n)
    samples: np.ndarray | None = None                # grid kind, (S, m, m)
    factor: complex = 1.0                            # applied after evaluation

    @property
    def is_constant(self) -> bool:
        return self.kind is FieldKind.CONSTANT

    def scaled(self, c: float) -> "CoefficientField":
        return replace(self, factor=self.factor * c)

    def rotated(self, theta: float) -> "CoefficientField":
        """The field e^{i theta} A."""
        return replace(self, factor=self.factor * cmath.exp(1j * theta))

    def with_box(self, box: DomainBox) -> "CoefficientField":
        if box.n != self.n:
            raise ValueError(f"Box dimension {box.n} does not match field dimension {self.n}")
        return replace(self, box=box)

    def values_at(self, points: Any) -> np.ndarray:
        """Matrices at each row of an (N, n) point array, shape (N, m, m)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.shape[1] != self.n:
            raise ValueError(f"Points have dimension {pts.shape[1]}, field expects {self.n}")
        count = pts.shape[0]
        if self.kind is FieldKind.CONSTANT:
            assert self.matrix is not None
            out = np.broadcast_to(self.matrix, (count, self.m, self.m)) * self.factor
            return np.array(out)
        if self.box is not None:
            _check_inside(self.box, pts)
        if self.kind is FieldKind.EXPRESSION:
            assert self.entries is not None
            xs = [pts[:, k] for k in range(self.n)]
            out = np.empty((count, self.m, self.m), dtype=complex)
            for i, row in enumerate(self.entries):
                for j, node in enumerate(row):
                    out[:, i, j] = np.broadcast_to(evaluate(node, xs, self.params), (count,))
        else:
            assert self.points is not None and self.samples is not None
            d2 = np.sum((pts[:, None, :] - self.points[None, :, :]) ** 2, axis=2)
            out = self.samples[np.argmin(d2, axis=1)].astype(complex)
        out = out * self.factor
        if not np.all(np.isfinite(out)):
            bad = pts[np.nonzero(~np.all(np.isfinite(out), axis=(1, 2)))[0][0]]
            raise ValueError(f"Coefficient evaluation is not finite at x = {tuple(bad)}")
        return out

    def at(self, x: Any) -> np.ndarray:
        return self.values_at(np.asarray(x, dtype=float).reshape(1, self.n))[0]


def eval_field(f: CoefficientField, x: Any) -> np.ndarray:
    return f.at(x)


def constant_field(matrix: Any, n: int = 1) -> CoefficientField:
    M = as_matrix(matrix)
    return CoefficientField(FieldKind.CONSTANT, M.shape[0], n, matrix=M)


def expression_field(
    texts: Sequence[Sequence[str]],
    n: int,
    box: DomainBox,
    params: Mapping[str, float] | None = None,
) -> CoefficientField:
    params = dict(params or {})
    m = len(texts)
    if m < 1 or any(len(row) != m for row in texts):
        raise ValueError("Expression entries must form a square table")
    if box.n != n:
        raise ValueError(f"Box dimension {box.n} does not match n = {n}")
    entries = tuple(tuple(parse_expr(str(t), n, list(params)) for t in row) for row in texts)
    return CoefficientField(FieldKind.EXPRESSION, m, n, entries=entries, box=box, params=params)


def grid_field(points: Any, matrices: Any, box: DomainBox) -> CoefficientField:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    vals = np.asarray(matrices, dtype=complex)
    if vals.ndim != 3 or vals.shape[1] != vals.shape[2] or vals.shape[0] != pts.shape[0]:
        raise ValueError("Grid samples need one square matrix per point")
    if pts.shape[1] != box.n:
        raise ValueError("Grid points and box differ in dimension")
    if not np.all(np.isfinite(vals)):
        raise ValueError("Grid samples have non-finite entries")
    for row in pts:
        if not box.contains(row):
            raise ValueError(f"Grid point {tuple(row)} lies outside the box")
    if len({tuple(r) for r in pts}) != pts.shape[0]:
        raise ValueError("Grid points must be pairwise distinct")
    return CoefficientField(
        FieldKind.GRID, vals.shape[1], box.n, box=box, points=pts, samples=vals
    )


# ---------------------------------------------------------------- JSON format


def _complex_entry(raw: Any) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ValueError(f"Complex entries are [re, im] pairs, got {raw!r}")
        return complex(float(raw[0]), float(raw[1]))
    return complex(float(raw))


def _matrix_from_json(raw: Any) -> np.ndarray:
    return np.array([[_complex_entry(e) for e in row] for row in raw], dtype=complex)


def _matrix_to_json(M: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def box_from_dict(data: Mapping[str, Any]) -> DomainBox:
    lo, hi = tuple(map(float, data["lo"])), tuple(map(float, data["hi"]))
    return DomainBox(
        lo,
        hi,
        tuple(bool(b) for b in data.get("infinite_lo", ())),
        tuple(bool(b) for b in data.get("infinite_hi", ())),
    )


def box_to_dict(box: DomainBox) -> dict[str, Any]:
    return {
        "lo": list(box.lo),
        "hi": list(box.hi),
        "infinite_lo": list(box.infinite_lo),
        "infinite_hi": list(box.infinite_hi),
    }


def field_from_dict(data: Mapping[str, Any]) -> CoefficientField:
    kind = str(data.get("kind", "constant"))
    n = int(data.get("n", 1))
    if kind == FieldKind.CONSTANT.value:
        f = constant_field(_matrix_from_json(data["matrix"]), n=n)
    elif kind == FieldKind.EXPRESSION.value:
        f = expression_field(data["entries"], n, box_from_dict(data["box"]), data.get("params"))
    elif kind == FieldKind.GRID.value:
        f = grid_field(
            data["points"], [_matrix_from_json(v) for v in data["values"]], box_from_dict(data["box"])
        )
    else:
        raise ValueError(f"Unknown field kind: {kind}")
    if "m" in data and int(data["m"]) != f.m:
        raise ValueError(f"Declared m = {data['m']} but entries give {f.m}")
    return f


def field_to_dict(f: CoefficientField) -> dict[str, Any]:
    out: dict[str, Any] = {"m": f.m, "n": f.n, "kind": f.kind.value}
    if f.kind is FieldKind.CONSTANT:
        assert f.matrix is not None
        out["matrix"] = _matrix_to_json(f.matrix * f.factor)
        return out
    if f.factor != 1.0:
        raise ValueError("Only constant fields serialise with a scaling factor")
    assert f.box is not None
    out["box"] = box_to_dict(f.box)
    if f.kind is FieldKind.EXPRESSION:
        assert f.entries is not None
        out["entries"] = [[print_expr(e) for e in row] for row in f.entries]
        out["params"] = dict(f.params)
    else:
        assert f.points is not None and f.samples is not None
        out["points"] = f.points.tolist()
        out["values"] = [_matrix_to_json(M) for M in f.samples]
    return out


def load_field(path: str | Path) -> CoefficientField:
    with open(path, encoding="utf-8") as fh:
        return field_from_dict(json.load(fh))


def _check_inside(box: DomainBox, pts: np.ndarray) -> None:
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    slack = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    outside = np.any((pts < lo - slack) | (pts > hi + slack), axis=1)
    if np.any(outside):
        raise ValueError(f"Point {tuple(pts[np.argmax(outside)])} lies outside the domain box")
