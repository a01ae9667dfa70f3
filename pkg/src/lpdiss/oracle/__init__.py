"""Numerical checks of the dissipativity functional on grid test fields."""

from .functional import elasticity_form_value, form_value
from .identities import elasticity_xy, elasticity_xy_identities
from .simulate import contraction_sim
from .testfield import Grid, TestField, random_testfield, to_u, to_v
from .witness import WitnessParams, violation_search, witness_grid, witness_testfield

__all__ = [
    "Grid",
    "TestField",
    "WitnessParams",
    "contraction_sim",
    "elasticity_form_value",
    "elasticity_xy",
    "elasticity_xy_identities",
    "form_value",
    "random_testfield",
    "to_u",
    "to_v",
    "violation_search",
    "witness_grid",
    "witness_testfield",
]
