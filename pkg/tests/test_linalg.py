import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpdiss.errors import ConvergenceError
from lpdiss.linalg import arccot, arccot_interval, herm_eigs, herm_form, re_im_split, sym_eigs

finite = st.floats(-10.0, 10.0, allow_nan=False)


def test_sym_eigs_matches_numpy():
    S = np.array([[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]])
    eig = sym_eigs(S)
    assert np.allclose(eig.values, np.linalg.eigvalsh(S), atol=1e-12)
    assert eig.residual < 1e-12
    V = eig.vectors
    assert np.allclose(V.T @ V, np.eye(3), atol=1e-12)


def test_sym_eigs_ascending_on_diagonal_input():
    eig = sym_eigs(np.diag([3.0, -1.0, 2.0]))
    assert eig.values == (-1.0, 2.0, 3.0)
    assert eig.smallest == -1.0 and eig.largest == 3.0


def test_sym_eigs_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eigs([[1.0, 2.0], [0.0, 1.0]])


def test_sym_eigs_sweep_cap():
    with pytest.raises(ConvergenceError):
        sym_eigs([[1.0, 1.0], [1.0, 2.0]], max_sweeps=0)


def test_herm_eigs_of_twisted_hermitian():
    eig = herm_eigs([[1.0, 1j], [-1j, 1.0]])
    assert eig.values == pytest.approx((0.0, 2.0), abs=1e-12)


@given(st.lists(finite, min_size=8, max_size=8), st.lists(finite, min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_herm_form_is_real_on_hermitian(raw, u_raw):
    M = np.array(raw[:4]).reshape(2, 2) + 1j * np.array(raw[4:]).reshape(2, 2)
    H = M + M.conj().T
    u = np.array(u_raw[:2]) + 1j * np.array(u_raw[2:])
    assert abs(herm_form(H, u, u).imag) <= 1e-12 * max(1.0, np.abs(H).max() * np.vdot(u, u).real)


def test_herm_form_length_mismatch():
    with pytest.raises(ValueError):
        herm_form(np.eye(2), [1.0], [1.0, 0.0])


def test_arccot_branch():
    assert arccot(0.0) == pytest.approx(math.pi / 2)
    assert arccot(math.inf) == 0.0
    assert arccot(-math.inf) == pytest.approx(math.pi)
    assert arccot(1.0 / math.sqrt(3.0)) == pytest.approx(math.pi / 3)
    with pytest.raises(ValueError):
        arccot(math.nan)


def test_arccot_interval():
    y = 1.0 / math.sqrt(3.0)
    iv = arccot_interval(y, y)
    assert iv.theta_minus == pytest.approx(math.pi / 3 - math.pi)
    assert iv.theta_plus == pytest.approx(math.pi / 3)
    empty_xi = arccot_interval(math.inf, -math.inf)
    assert (empty_xi.theta_minus, empty_xi.theta_plus) == pytest.approx((-math.pi, math.pi))
    with pytest.raises(ValueError):
        arccot_interval(2.0, 1.0)


def test_re_im_split():
    re, im = re_im_split([[1.0, 2j], [-1j, 3.0]])
    assert re.tolist() == [[1.0, 0.0], [0.0, 3.0]]
    assert im.tolist() == [[0.0, 2.0], [-1.0, 0.0]]
    with pytest.raises(ValueError):
        re_im_split([[1.0, 2.0]])


@st.composite
def symmetric_matrices(draw, max_m=8):
    m = draw(st.integers(1, max_m))
    raw = draw(st.lists(finite, min_size=m * m, max_size=m * m))
    M = np.array(raw).reshape(m, m)
    return M + M.T


@given(symmetric_matrices())
@settings(max_examples=200, deadline=None)
def test_sym_eigs_reconstructs_random_symmetric(S):
    eig = sym_eigs(S)
    V = eig.vectors
    scale = max(1.0, float(np.linalg.norm(S)))
    assert np.linalg.norm(V @ np.diag(eig.values) @ V.T - S) <= 1e-12 * scale
    assert list(eig.values) == sorted(eig.values)


@given(symmetric_matrices(max_m=4), symmetric_matrices(max_m=4))
@settings(max_examples=100, deadline=None)
def test_herm_eigs_reconstructs_random_hermitian(R, K):
    m = min(R.shape[0], K.shape[0])
    # antisymmetric imaginary part keeps H Hermitian
    I = np.triu(K[:m, :m], 1)
    H = R[:m, :m] + 1j * (I - I.T)
    eig = herm_eigs(H)
    V = eig.vectors
    scale = max(1.0, float(np.linalg.norm(H)))
    assert np.linalg.norm(V @ np.diag(eig.values) @ V.conj().T - H) <= 1e-12 * scale
    assert np.allclose(eig.values, np.linalg.eigvalsh(H), atol=1e-12 * scale)


def test_herm_eigs_of_rotated_twisted_coefficient():
    A = np.exp(1j * (math.pi / 4 + 1e-2)) * np.array([[1.0, 1j], [1j, 1.0]])
    eig = herm_eigs(0.5 * (A + A.conj().T))
    assert np.allclose(eig.values, np.linalg.eigvalsh(0.5 * (A + A.conj().T)), atol=1e-12)
    assert eig.residual < 1e-12


def test_sym_eigs_with_tiny_off_diagonal():
    eig = sym_eigs([[1.0, 1e-200], [1e-200, 2.0]])
    assert eig.values == pytest.approx((1.0, 2.0))
    assert np.all(np.isfinite(eig.vectors))


@given(
    st.floats(-50.0, 50.0),
    st.floats(0.0, 20.0),
    st.floats(0.0, 20.0),
    st.floats(0.0, 20.0),
)
def test_arccot_interval_is_antitone_with_width_pi(a, width, grow_lo, grow_hi):
    inner = arccot_interval(a, a + width)
    outer = arccot_interval(a - grow_lo, a + width + grow_hi)
    assert outer.theta_minus >= inner.theta_minus - 1e-15
    assert outer.theta_plus <= inner.theta_plus + 1e-15
    assert inner.width <= math.pi + 1e-15
    point = arccot_interval(a, a)
    assert point.width == pytest.approx(math.pi)
