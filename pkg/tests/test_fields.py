import cmath
import json

import numpy as np
import pytest

from lpdiss.fields import (
    FieldKind,
    constant_field,
    eval_field,
    expression_field,
    field_from_dict,
    field_to_dict,
    grid_field,
    load_field,
)
from lpdiss.types import DomainBox

UNIT = DomainBox((0.0,), (1.0,))


def test_constant_field_broadcasts():
    f = constant_field([[1.0, 2.0], [3.0, 4.0]], n=3)
    vals = f.values_at(np.zeros((5, 3)))
    assert vals.shape == (5, 2, 2)
    assert np.all(vals[4] == [[1, 2], [3, 4]])


def test_expression_field():
    f = expression_field([["1 + x1", "0"], ["0", "i*x1"]], 1, UNIT)
    A = f.at([0.5])
    assert A[0, 0] == pytest.approx(1.5)
    assert A[1, 1] == pytest.approx(0.5j)


def test_expression_field_outside_box():
    f = expression_field([["x1"]], 1, UNIT)
    with pytest.raises(ValueError, match="outside"):
        f.at([2.0])


def test_expression_field_non_finite_value():
    f = expression_field([["1 / x1"]], 1, DomainBox((-1.0,), (1.0,)))
    with pytest.raises(ValueError, match="not finite"):
        f.at([0.0])


def test_grid_field_nearest_neighbour_ties_to_lowest_index():
    f = grid_field([[0.0], [1.0]], [[[1.0]], [[2.0]]], UNIT)
    assert f.at([0.5])[0, 0] == 1.0
    assert f.at([0.9])[0, 0] == 2.0


def test_grid_field_rejects_duplicates():
    with pytest.raises(ValueError):
        grid_field([[0.5], [0.5]], [[[1.0]], [[2.0]]], UNIT)


def test_rotation_and_scaling():
    f = constant_field([[2.0]]).rotated(0.5).scaled(3.0)
    assert f.at([0.0])[0, 0] == pytest.approx(6.0 * cmath.exp(0.5j))


def test_json_layout_round_trip(tmp_path):
    f = expression_field([["a + x1", "0"], ["0", "2"]], 1, UNIT, params={"a": 1.5})
    data = field_to_dict(f)
    g = field_from_dict(data)
    assert g.kind is FieldKind.EXPRESSION
    pts = np.linspace(0.0, 1.0, 7)[:, None]
    assert np.allclose(f.values_at(pts), g.values_at(pts))

    const = {"kind": "constant", "n": 1, "matrix": [[1, [0, 1]], [[0, 1], 1]]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(const), encoding="utf-8")
    h = load_field(path)
    assert h.at([0.0])[0, 1] == 1j


def test_declared_size_must_match():
    with pytest.raises(ValueError):
        field_from_dict({"kind": "constant", "m": 3, "matrix": [[1.0]]})


def test_eval_field_at_a_point():
    f = expression_field([["1 + x1", "i"], ["i", "2 * x1"]], 1, UNIT)
    A = eval_field(f, (0.5,))
    assert A.shape == (2, 2)
    assert A[0, 0] == pytest.approx(1.5)
    assert A[0, 1] == pytest.approx(1j)
    assert A[1, 1] == pytest.approx(1.0)
