import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lpdiss.elasticity import (
    elasticity_check,
    elasticity_nu_set,
    elasticity_p_interval,
    elasticity_region,
    elasticity_shift_lower,
    elasticity_shift_upper,
    region_grid,
    vecchia_margin,
)
from lpdiss.errors import HypothesisError
from lpdiss.systems import pq_values
from lpdiss.types import ElasticityParams, PExponent, Status

nus = st.floats(-3.0, 4.0, allow_nan=False).filter(lambda nu: nu != 0.5)
exponents = st.floats(1.01, 40.0)


def test_margin_at_p_two():
    assert vecchia_margin(0.3, PExponent(2.0)) == pytest.approx(0.56 / 3.24)
    assert elasticity_check(ElasticityParams(0.3), PExponent(2.0)).margin == pytest.approx(0.172839, abs=1e-6)


def test_p_interval_at_nu_0_3():
    iv = elasticity_p_interval(ElasticityParams(0.3))
    assert iv.p_lo == pytest.approx(1.092013, abs=1e-5)
    assert iv.p_hi == pytest.approx(11.867986, abs=1e-5)
    assert elasticity_check(ElasticityParams(0.3), PExponent(iv.p_hi)).boundary


@pytest.mark.parametrize("nu", [0.6, 0.75, 0.9])
def test_no_exponent_between_one_half_and_one(nu):
    assert elasticity_p_interval(ElasticityParams(nu)).empty
    assert not elasticity_check(ElasticityParams(nu), PExponent(2.0)).holds


def test_three_quarters_avoids_division():
    assert vecchia_margin(0.75, PExponent(3.0)) == pytest.approx(-0.25)


@given(nus, exponents)
@settings(max_examples=200, deadline=None)
def test_conjugate_exponents_agree(nu, p):
    a = elasticity_check(ElasticityParams(nu), PExponent(p))
    b = elasticity_check(ElasticityParams(nu), PExponent(p / (p - 1.0)))
    assume(abs(a.margin) > 1e-9)
    assert a.status is b.status


@given(nus, exponents)
@settings(max_examples=200, deadline=None)
def test_nu_set_matches_check(nu, p):
    verdict = elasticity_check(ElasticityParams(nu), PExponent(p))
    assume(abs(verdict.margin) > 1e-9)
    assert elasticity_nu_set(PExponent(p)).contains(nu) is verdict.holds


def test_nu_set_at_p_two():
    nuset = elasticity_nu_set(PExponent(2.0))
    assert (nuset.upper, nuset.lower) == pytest.approx((0.5, 1.0))
    assert not nuset.upper_closed


def test_failing_pair_has_a_witness(plan):
    verdict = elasticity_check(ElasticityParams(0.3), PExponent(20.0), plan)
    assert verdict.status is Status.FAILS
    w = verdict.witness
    B = np.diag([1.0 + ElasticityParams(0.3).gamma, 1.0])
    assert pq_values(B, PExponent(20.0), w.lam, w.omega).p_val < 0


def test_shift_lower():
    report = elasticity_shift_lower(ElasticityParams(0.3), PExponent(2.0))
    assert report.exists
    assert report.k_sup == pytest.approx(1.0, abs=1e-12)
    assert 0.0 < report.metadata["k"] < 1.0


def test_shift_lower_needs_strict_inequality():
    params = ElasticityParams(0.3)
    p_hi = elasticity_p_interval(params).p_hi
    assert not elasticity_shift_lower(params, PExponent(p_hi)).exists
    assert elasticity_shift_lower(params, PExponent(p_hi * 0.999)).exists


@given(nus.filter(lambda nu: nu not in (0.25,)), exponents)
@settings(max_examples=20)
def test_upper_family_is_dual_of_lower(nu, p):
    upper = elasticity_shift_upper(ElasticityParams(nu), PExponent(p))
    lower = elasticity_shift_lower(ElasticityParams(1.0 - nu), PExponent(p))
    assert upper.exists is lower.exists
    assert upper.criterion_value == pytest.approx(lower.criterion_value, rel=1e-9, abs=1e-9)


def test_upper_family_degenerate_denominator():
    with pytest.raises(HypothesisError, match="degenerate denominator"):
        elasticity_shift_upper(ElasticityParams(0.25), PExponent(3.0))


def test_region_skips_one_half():
    rows, notes = elasticity_region([0.0, 0.3, 0.5, 2.0])
    assert [r.nu for r in rows] == [0.0, 0.3, 2.0]
    assert any("1/2" in n for n in notes)
    zero = rows[0].as_row()
    # nu = 0: (3 - 4 nu)^2 = 9
    b = math.sqrt(1.0 - 1.0 / 9.0)
    assert zero["p_lo"] == pytest.approx(2.0 / (1.0 + b))


def test_region_splits_branches_and_flags_weak_ellipticity():
    rows, notes = elasticity_region([0.9, 0.3, 2.0, 0.6, -1.0])
    assert [r.nu for r in rows] == [0.3, -1.0, 0.9, 2.0, 0.6]
    assert [r.branch for r in rows] == ["below", "below", "above", "above", "above"]
    assert [r.strong_elliptic for r in rows] == [True, True, False, True, False]
    assert any("split at nu = 1/2: 2 rows" in n for n in notes)
    assert any("not strongly elliptic" in n for n in notes)
    assert all(r.interval.empty for r in rows if not r.strong_elliptic)


def test_region_grid_leaves_out_one_half():
    grid = region_grid(-1.0, 2.0, 31)
    assert 0.5 not in grid
    assert grid[0] == -1.0 and grid[-1] == 2.0
    assert len(grid) == 31
    assert max(v for v in grid if v < 0.5) < 0.5 < min(v for v in grid if v > 0.5)
    assert region_grid(0.0, 0.4, 5) == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])
    with pytest.raises(ValueError):
        region_grid(1.0, 1.0, 3)
