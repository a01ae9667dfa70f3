import math

import numpy as np
import pytest

from lpdiss.errors import HypothesisError, PreconditionError
from lpdiss.fields import constant_field, expression_field
from lpdiss.scalar import (
    real_scalar_angle,
    scalar_angle,
    scalar_check,
    scalar_lambda_bounds,
    scalar_p_interval,
)
from lpdiss.types import DomainBox, PExponent, Status


def test_twisted_coefficient_p_interval(twisted, plan):
    iv = scalar_p_interval(twisted, plan)
    assert iv.p_lo == pytest.approx(4.0 - 2.0 * math.sqrt(2.0), abs=1e-7)
    assert iv.p_hi == pytest.approx(4.0 + 2.0 * math.sqrt(2.0), abs=1e-7)
    assert iv.closed_lo and iv.closed_hi


@pytest.mark.parametrize("p, holds", [(1.5, True), (2.0, True), (4.0, True), (1.1, False), (12.0, False)])
def test_twisted_coefficient_check(twisted, plan, p, holds):
    verdict = scalar_check(twisted, PExponent(p), plan)
    assert verdict.holds is holds
    assert not verdict.sampled


def test_failing_check_carries_witness(twisted, plan):
    verdict = scalar_check(twisted, PExponent(12.0), plan)
    assert verdict.status is Status.FAILS
    # c - d with c = 2 sqrt(11), d = 10
    assert verdict.margin == pytest.approx(2.0 * math.sqrt(11.0) - 10.0, abs=1e-6)
    xi = np.asarray(verdict.witness.xi)
    assert np.linalg.norm(xi) == pytest.approx(1.0)


def test_endpoint_is_flagged_as_boundary(twisted, plan):
    verdict = scalar_check(twisted, PExponent(4.0 + 2.0 * math.sqrt(2.0)), plan)
    assert verdict.holds
    assert verdict.boundary


@pytest.mark.parametrize("theta", np.linspace(-math.pi / 4, math.pi / 4, 50))
def test_rotations_inside_the_angle_stay_dissipative(twisted, plan, theta):
    assert scalar_check(twisted.rotated(theta), PExponent(2.0), plan).holds


@pytest.mark.parametrize("theta", [math.pi / 4 + 1e-2, -math.pi / 4 - 1e-2, 1.2])
def test_rotations_outside_the_angle_fail(twisted, plan, theta):
    assert not scalar_check(twisted.rotated(theta), PExponent(2.0), plan).holds


def test_angle_of_twisted_coefficient(twisted, plan):
    report = scalar_angle(twisted, PExponent(2.0), plan)
    assert (report.lambda1, report.lambda2) == pytest.approx((-1.0, 1.0), abs=1e-9)
    assert report.interval.theta_minus == pytest.approx(-math.pi / 4, abs=1e-6)
    assert report.interval.theta_plus == pytest.approx(math.pi / 4, abs=1e-6)
    assert not report.xi_empty


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0, 10.0])
def test_real_coefficients_reproduce_the_closed_form(plan, p):
    report = scalar_angle(constant_field(np.eye(2), n=2), PExponent(p), plan)
    expected = real_scalar_angle(PExponent(p))
    assert report.interval.theta_minus == pytest.approx(expected.theta_minus, abs=1e-9)
    assert report.interval.theta_plus == pytest.approx(expected.theta_plus, abs=1e-9)


def test_real_scalar_angle_values():
    assert real_scalar_angle(PExponent(4.0)).theta_plus == pytest.approx(math.pi / 3, abs=1e-12)
    assert real_scalar_angle(PExponent(2.0)).theta_plus == pytest.approx(math.pi / 2)
    a, b = real_scalar_angle(PExponent(3.0)), real_scalar_angle(PExponent(1.5))
    assert a.theta_plus == pytest.approx(b.theta_plus)


def test_angle_requires_dissipativity(twisted, plan):
    with pytest.raises(PreconditionError) as info:
        scalar_angle(twisted, PExponent(12.0), plan)
    assert info.value.witness is not None


def test_purely_imaginary_coefficient(plan):
    f = constant_field([[1j]])
    lam1, lam2, xi_empty = scalar_lambda_bounds(f, plan)
    assert lam1 == math.inf and lam2 == math.inf and xi_empty
    interval = scalar_angle(f, PExponent(2.0), plan).interval
    assert (interval.theta_minus, interval.theta_plus) == pytest.approx((-math.pi, 0.0))
    assert not scalar_check(f, PExponent(3.0), plan).holds


def test_asymmetric_imaginary_part_is_rejected(plan):
    f = constant_field([[1.0, 1j], [0.0, 1.0]], n=2)
    with pytest.raises(HypothesisError, match="Im A is not symmetric"):
        scalar_check(f, PExponent(2.0), plan)


def test_variable_coefficient_is_sampled(plan):
    f = expression_field([["1 + x1"]], 1, DomainBox((0.0,), (1.0,)))
    verdict = scalar_check(f, PExponent(4.0), plan)
    assert verdict.holds and verdict.sampled
    assert verdict.samples > plan.n_directions


def test_p_interval_extremes(plan):
    everywhere = scalar_p_interval(constant_field(np.eye(2), n=2), plan)
    assert (everywhere.p_lo, everywhere.p_hi) == (1.0, math.inf)
    assert not everywhere.closed_lo and not everywhere.closed_hi
    assert scalar_p_interval(constant_field([[-1.0]]), plan).empty
