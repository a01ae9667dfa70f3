"""
Dense linear algebra for small complex matrices.

The eigen-solver is a cyclic Jacobi iteration (Givens rotations applied to
rows and columns in place); matrices here are at most a few dozen rows.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .errors import ConvergenceError
from .logging import get_logger
from .types import AngleInterval, EigenSpectrum

logger = get_logger(__name__)

MAX_SWEEPS = 50
SYMMETRY_RTOL = 1e-12
OFFDIAG_RTOL = 1e-14
BIG_THETA = 1e150
EPS = float(np.finfo(float).eps)


def as_matrix(M: Any, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def re_im_split(M: Any) -> tuple[np.ndarray, np.ndarray]:
    A = as_matrix(M)
    return A.real.copy(), A.imag.copy()


def herm_form(M: Any, u: Any, v: Any) -> complex:
    """<Mu, v> = sum_j (Mu)_j conj(v_j)."""
    A = as_matrix(M)
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if u.shape[0] != A.shape[0] or v.shape[0] != A.shape[0]:
        raise ValueError(
            f"Vector lengths {u.shape[0]}, {v.shape[0]} do not match matrix size {A.shape[0]}"
        )
    return complex(np.vdot(v, A @ u))


def is_symmetric(S: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(S))))
    return bool(np.max(np.abs(S - S.T)) <= rtol * scale)


def sym_eigs(S: Any, max_sweeps: int = MAX_SWEEPS) -> EigenSpectrum:
    """Ascending eigenvalues and eigenvectors (columns) of a real symmetric matrix."""
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"Expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("Matrix has non-finite entries")
    if not is_symmetric(A):
        raise ValueError("sym_eigs requires a symmetric matrix")
    S0 = 0.5 * (A + A.T)
    A = S0.copy()
    m = A.shape[0]
    V = np.eye(m)
    norm = float(np.linalg.norm(S0))
    # rounding leaves off-diagonal noise of order m eps |S|
    target = max(OFFDIAG_RTOL, 4.0 * m * EPS) * norm

    def off_mass() -> float:
        # norm of the off-diagonal part directly; |A|^2 - |diag A|^2 cancels
        return float(np.linalg.norm(A - np.diag(np.diag(A))))

    sweeps = 0
    while off_mass() > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError("Jacobi iteration hit the sweep cap", off_mass())
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > BIG_THETA:
                    # theta^2 would overflow; t -> 1/(2 theta)
                    t = 0.5 / theta
                else:
                    sign = 1.0 if theta >= 0.0 else -1.0
                    t = sign / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq

    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    values, V = values[order], V[:, order]
    residual = float(np.linalg.norm(V @ np.diag(values) @ V.T - S0))
    logger.debug("jacobi: m=%d sweeps=%d residual=%.2e", m, sweeps, residual)
    return EigenSpectrum(tuple(float(v) for v in values), residual, V)


def herm_eigs(H: Any) -> EigenSpectrum:
    """
    Eigenvalues of a Hermitian matrix through the real embedding
    [[Re H, -Im H], [Im H, Re H]], whose spectrum is that of H doubled.
    """
    A = as_matrix(H, "Hermitian matrix")
    if np.max(np.abs(A - A.conj().T)) > SYMMETRY_RTOL * max(1.0, float(np.max(np.abs(A)))):
        raise ValueError("herm_eigs requires a Hermitian matrix")
    m = A.shape[0]
    R, I = A.real, A.imag
    big = sym_eigs(np.block([[R, -I], [I, R]]))
    assert big.vectors is not None
    # column (a, b) of the embedding encodes the complex eigenvector a + i b;
    # (a, b) and (-b, a) give the same complex line, so pick m columns by
    # largest residual against the complex span already chosen
    cols = big.vectors[:m, :] + 1j * big.vectors[m:, :]
    basis = np.zeros((m, 0), dtype=complex)
    chosen: list[int] = []
    for _ in range(m):
        resid = cols - basis @ (basis.conj().T @ cols)
        norms = np.linalg.norm(resid, axis=0)
        norms[chosen] = -1.0
        k = int(np.argmax(norms))
        chosen.append(k)
        basis = np.hstack([basis, resid[:, k : k + 1] / norms[k]])
    order = np.argsort([big.values[k] for k in chosen], kind="stable")
    values = tuple(big.values[chosen[i]] for i in order)
    return EigenSpectrum(values, big.residual, basis[:, order])


def arccot(y: float) -> float:
    """Branch of arccot with values in (0, pi); arccot(+inf) = 0, arccot(-inf) = pi."""
    if math.isnan(y):
        raise ValueError("arccot of NaN")
    return math.atan2(1.0, y)


def arccot_interval(qp_inf: float, qp_sup: float) -> AngleInterval:
    """
    [arccot(qp_inf) - pi, arccot(qp_sup)]. An empty index set is encoded as
    qp_inf = +inf, qp_sup = -inf and yields [-pi, pi].
    """
    if math.isnan(qp_inf) or math.isnan(qp_sup):
        raise ValueError("arccot_interval got NaN bounds")
    if math.isfinite(qp_inf) and math.isfinite(qp_sup) and qp_inf > qp_sup:
        raise ValueError(f"arccot_interval needs qp_inf <= qp_sup, got {qp_inf} > {qp_sup}")
    return AngleInterval(arccot(qp_inf) - math.pi, arccot(qp_sup))
