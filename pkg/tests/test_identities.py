import math

import numpy as np
import pytest

from lpdiss.oracle import Grid, TestField, elasticity_xy, elasticity_xy_identities, random_testfield
from lpdiss.oracle.identities import analytic_field
from lpdiss.sampling import SplitMix64


@pytest.mark.parametrize("kind", ["single", "equal", "mixed"])
def test_identities_hold_exactly_on_the_grid(kind):
    report = elasticity_xy_identities(analytic_field(kind, 256))
    assert report.rel_xy <= 1e-6
    assert report.magic <= 1e-6
    assert report.mode == "identity"
    assert report.cells > 0


def test_identities_on_random_fields():
    grid = Grid((0.0, 0.0), (1.0, 1.0), (96, 96))
    gen = SplitMix64(21)
    for _ in range(5):
        report = elasticity_xy_identities(random_testfield(grid, 2, gen, real=True))
        assert report.rel_xy <= 1e-6
        assert report.magic <= 1e-6


def test_difference_mode_converges_at_second_order():
    coarse = elasticity_xy_identities(analytic_field("mixed", 65), mode="difference")
    fine = elasticity_xy_identities(analytic_field("mixed", 129), mode="difference")
    assert fine.rel_xy < coarse.rel_xy
    assert math.log2(coarse.rel_xy / fine.rel_xy) >= 1.5


def test_squares_add_up():
    xy = elasticity_xy(analytic_field("equal", 64))
    m = xy.mask
    total = xy.X1**2 + xy.X2**2 + xy.Y1**2 + xy.Y2**2
    assert np.allclose(total[m], xy.dirichlet[m])


def test_rejected_inputs():
    with pytest.raises(ValueError, match="Unknown analytic field"):
        analytic_field("spiral", 32)
    with pytest.raises(ValueError, match="Unknown gradient mode"):
        elasticity_xy_identities(analytic_field("single", 32), mode="spectral")
    grid = Grid((0.0, 0.0), (1.0, 1.0), (32, 32))
    with pytest.raises(ValueError, match="real"):
        elasticity_xy(random_testfield(grid, 2, SplitMix64(0)))
    with pytest.raises(ValueError, match="vanishes"):
        elasticity_xy(TestField(grid, np.zeros((32, 32, 2))))
    with pytest.raises(ValueError, match="n = m = 2"):
        elasticity_xy(random_testfield(grid, 3, SplitMix64(0), real=True))
