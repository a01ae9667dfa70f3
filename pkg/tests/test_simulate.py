import math

import pytest

from lpdiss.fields import constant_field
from lpdiss.operators import OperatorSpec
from lpdiss.oracle import (
    Grid,
    TestField,
    WitnessParams,
    contraction_sim,
    random_testfield,
    to_u,
    witness_grid,
    witness_testfield,
)
from lpdiss.oracle.witness import criterion_witness
from lpdiss.sampling import SplitMix64
from lpdiss.types import ElasticityParams, PExponent, SamplingPlan

GRID = Grid((0.0,), (1.0,), (128,))
H = 1.0 / 127


def test_dissipative_system_contracts(diag_1_9):
    gen = SplitMix64(3)
    dt = 0.9 * 0.4 * H * H / 9.0
    for _ in range(10):
        u0 = random_testfield(GRID, 2, gen, real=True)
        result = contraction_sim(diag_1_9, PExponent(3.0), u0, 1e-3, dt)
        assert result.monotone
        assert result.norms[-1] < result.norms[0]


def test_heat_equation_baseline():
    op = OperatorSpec.diagonal([constant_field([[1.0]])])
    u0 = random_testfield(GRID, 1, SplitMix64(9), real=True)
    result = contraction_sim(op, PExponent(2.0), u0, 1e-3, 0.9 * 0.4 * H * H)
    assert result.monotone
    assert result.steps == len(result.norms) - 1
    assert result.to_dict()["final_norm"] == result.norms[-1]


def test_step_above_the_stability_limit(diag_1_9):
    u0 = random_testfield(GRID, 2, SplitMix64(0), real=True)
    with pytest.raises(ValueError, match="CFL violation"):
        contraction_sim(diag_1_9, PExponent(3.0), u0, 1e-3, H * H)


def test_only_one_dimensional_diagonal_systems():
    op = OperatorSpec.elastic(ElasticityParams(0.3))
    u0 = random_testfield(Grid((0.0, 0.0), (1.0, 1.0), (16, 16)), 2, SplitMix64(0), real=True)
    with pytest.raises(ValueError, match="one-dimensional"):
        contraction_sim(op, PExponent(2.0), u0, 1e-3, 1e-6)


def test_time_arguments_must_be_positive(diag_1_9):
    u0 = random_testfield(GRID, 2, SplitMix64(0), real=True)
    with pytest.raises(ValueError, match="positive"):
        contraction_sim(diag_1_9, PExponent(3.0), u0, 0.0, 1e-6)


def test_norm_grows_for_a_violating_initial_value(diag_1_9):
    p = PExponent(10.0)
    witness = criterion_witness(diag_1_9, p, SamplingPlan(seed=0, n_points=8, n_directions=800, refine_iters=20))
    wp = WitnessParams(10.0, 32.0)
    needed = witness_grid(witness, diag_1_9, p, wp)
    h = 1.0 / 32.0
    nodes = math.ceil((needed.hi[0] - needed.lo[0]) / h - 1e-9) + 1
    grid = Grid(needed.lo, (needed.lo[0] + (nodes - 1) * h,), (nodes,))
    v = witness_testfield(witness, diag_1_9, p, wp, grid=grid)
    u0 = TestField(grid, to_u(v.values, p.p))
    dt = 0.9 * 0.4 * h * h / 9.0
    result = contraction_sim(diag_1_9, p, u0, 50 * dt, dt)
    # u_t = (A u')' lets the L^10 norm grow from this start
    assert result.norms[-1] > result.norms[0]
    assert result.max_relative_increase > 0.0
