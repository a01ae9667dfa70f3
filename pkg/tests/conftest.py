import json

import numpy as np
import pytest

from lpdiss.fields import constant_field
from lpdiss.operators import OperatorSpec
from lpdiss.types import SamplingPlan


@pytest.fixture
def plan():
    return SamplingPlan(seed=7, n_points=16, n_directions=800, refine_iters=20)


@pytest.fixture
def diag_1_9():
    return OperatorSpec.diagonal([constant_field(np.diag([1.0, 9.0]))])


@pytest.fixture
def twisted():
    """The scalar coefficient [[1, i], [i, 1]] in two dimensions."""
    return constant_field([[1.0, 1j], [1j, 1.0]], n=2)


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
