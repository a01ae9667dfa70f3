import numpy as np
import pytest

from lpdiss.oracle.testfield import Grid, TestField, random_testfield, to_u, to_v
from lpdiss.sampling import SplitMix64


def test_grid_geometry():
    grid = Grid((0.0, -1.0), (1.0, 1.0), (11, 21))
    assert grid.spacing == pytest.approx((0.1, 0.1))
    assert grid.mesh().shape == (11, 21, 2)
    assert grid.cell_centers().shape == (10, 20, 2)
    assert grid.cell_volume == pytest.approx(0.01)
    with pytest.raises(ValueError):
        Grid((0.0,), (1.0,), (2,))


def test_field_must_vanish_on_boundary():
    grid = Grid((0.0,), (1.0,), (5,))
    with pytest.raises(ValueError, match="boundary"):
        TestField(grid, np.ones(5))
    vals = np.array([0.0, 1.0, 2.0, 1.0, 0.0])
    assert TestField(grid, vals).m == 1


def test_support_mask_is_enforced():
    grid = Grid((0.0,), (1.0,), (6,))
    vals = np.array([0.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    mask = np.array([False, True, True, False, False, False])
    TestField(grid, vals, support_mask=mask)
    with pytest.raises(ValueError, match="support mask"):
        TestField(grid, vals, support_mask=np.roll(mask, 2))


def test_random_fields_are_seeded():
    grid = Grid((0.0, 0.0), (1.0, 1.0), (33, 33))
    a = random_testfield(grid, 2, SplitMix64(5))
    b = random_testfield(grid, 2, SplitMix64(5))
    assert np.array_equal(a.values, b.values)
    assert not a.is_real
    assert random_testfield(grid, 2, SplitMix64(5), real=True).is_real


def test_json_file_layout(tmp_path):
    grid = Grid((0.0,), (1.0,), (9,))
    field = random_testfield(grid, 2, SplitMix64(1))
    path = tmp_path / "v.json"
    field.save(path)
    again = TestField.load(path)
    assert again.grid == grid
    assert np.allclose(again.values, field.values)


def test_u_v_substitution_inverts():
    u = SplitMix64(2).normal(30).reshape(10, 3)
    u[3] = 0.0
    v = to_v(u, 3.0)
    assert np.allclose(np.linalg.norm(v, axis=1), np.linalg.norm(u, axis=1) ** 1.5)
    assert np.allclose(to_u(v, 3.0), u)
