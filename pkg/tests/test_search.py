import numpy as np
import pytest

from lpdiss.search import golden_section, golden_section_batch, multistart, refine_batch, refine_coordinates


def test_golden_section_finds_parabola_minimum():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1.0, 0.0, 1.0, tol=1e-10)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(1.0)


def test_refine_coordinates_never_worse():
    def f(z):
        return float((z[0] - 1.0) ** 2 + 10.0 * (z[1] + 2.0) ** 2)

    z0 = np.array([0.0, 0.0])
    z, val = refine_coordinates(f, z0, rounds=60)
    assert val <= f(z0)
    assert z == pytest.approx([1.0, -2.0], abs=1e-4)


def test_multistart_keeps_best_start():
    def f(z):
        return float(min((z[0] - 3.0) ** 2, (z[0] + 3.0) ** 2 + 1.0))

    z, val = multistart(f, [[-2.5], [2.5]], rounds=30)
    assert z[0] == pytest.approx(3.0, abs=1e-4)
    assert val == pytest.approx(0.0, abs=1e-8)


def test_multistart_needs_a_start():
    with pytest.raises(ValueError):
        multistart(lambda z: 0.0, [], rounds=5)


def test_golden_section_batch_runs_brackets_independently():
    targets = np.array([0.1, -0.4, 0.7])
    x, fx = golden_section_batch(
        lambda t: (t - targets) ** 2, np.full(3, -1.0), np.ones(3), tol=1e-10
    )
    assert x == pytest.approx(targets, abs=1e-6)
    assert fx == pytest.approx(np.zeros(3), abs=1e-10)


def test_refine_batch_never_worse_per_row():
    calls = []

    def f(Z):
        calls.append(Z.shape[0])
        return (Z[:, 0] - 1.0) ** 2 + 10.0 * (Z[:, 1] + 2.0) ** 2

    starts = np.array([[0.0, 0.0], [5.0, 5.0], [1.0, -2.0]])
    Z, best = refine_batch(f, starts, rounds=60)
    assert np.all(best <= f(starts))
    assert Z == pytest.approx(np.tile([1.0, -2.0], (3, 1)), abs=1e-4)
    # one evaluation per row per step, never a per-row loop
    assert set(calls) == {3}


def test_batched_multistart_matches_rowwise():
    def f(z):
        return float((z[0] - 0.25) ** 2 + abs(z[1]))

    def fb(Z):
        return (Z[:, 0] - 0.25) ** 2 + np.abs(Z[:, 1])

    starts = [[1.0, 1.0], [-1.0, 0.5]]
    z1, v1 = multistart(f, starts, rounds=40)
    z2, v2 = multistart(fb, starts, rounds=40, batched=True)
    assert v1 == pytest.approx(v2, abs=1e-12)
    assert z1 == pytest.approx(z2, abs=1e-12)
