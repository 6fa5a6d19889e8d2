"""Weighted inner products, norms, orthonormalization and truncated SVD."""

from typing import Tuple

import numpy as np

from tdb_sparse.linalg.factorizations import (
    LinalgError,
    RankDeficiencyError,
    jacobi_svd,
    sym_eig,
)
from tdb_sparse.models.state import QuadratureWeights


# Eigenvalues of a Gram matrix below this fraction of the largest are numerical zeros.
GRAM_RTOL = 1e-14
ORTHO_RTOL = 1e-12


def weighted_inner(A: np.ndarray, B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Weighted inner-product matrix Aᵀ diag(w) B.

    Args:
        A: Matrix n×a.
        B: Matrix n×b.
        w: Weight vector of length n.

    Returns:
        Matrix a×b.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w = np.asarray(w, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if not (A.shape[0] == B.shape[0] == w.shape[0]):
        raise LinalgError(
            f"weighted_inner dimension mismatch: {A.shape}, {B.shape}, weights {w.shape}"
        )
    return A.T @ (w[:, None] * B)


def weighted_frobenius(V: np.ndarray, weights: QuadratureWeights) -> float:
    """Weighted Frobenius norm sqrt(Σ wx_i wxi_j V_ij²)."""
    V = np.asarray(V, dtype=float)
    if V.shape != (weights.n, weights.s):
        raise LinalgError(
            f"weighted_frobenius shape {V.shape} does not match weights ({weights.n}, {weights.s})"
        )
    return float(np.sqrt(weights.wx @ (V * V) @ weights.wxi))


def _weighted_mgs(U: np.ndarray, w: np.ndarray, check: bool) -> Tuple[np.ndarray, np.ndarray]:
    Q = np.array(U, dtype=float, copy=True)
    k = Q.shape[1]
    R = np.zeros((k, k))
    for j in range(k):
        v = Q[:, j]
        original = float(np.sqrt(v @ (w * v)))
        for i in range(j):
            R[i, j] = Q[:, i] @ (w * v)
            v = v - R[i, j] * Q[:, i]
        norm = float(np.sqrt(v @ (w * v)))
        if norm == 0.0 or (check and norm <= ORTHO_RTOL * original):
            raise RankDeficiencyError(
                f"column {j} is linearly dependent on the preceding columns",
                achievable=j,
                deficient=k - j,
                column=j,
            )
        R[j, j] = norm
        Q[:, j] = v / norm
    return Q, R


def reorthonormalize(U: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted Gram-Schmidt, applied twice, so that U = U' T.

    Args:
        U: Matrix n×r of numerically full column rank.
        w: Weight vector of length n.

    Returns:
        U' orthonormal under diag(w) and upper-triangular T (r×r).

    Raises:
        RankDeficiencyError: Naming the first defective column.
    """
    U = np.asarray(U, dtype=float)
    w = np.asarray(w, dtype=float)
    if U.ndim != 2 or U.shape[0] != w.shape[0]:
        raise LinalgError(f"reorthonormalize dimension mismatch: {U.shape}, weights {w.shape}")
    if not np.all(np.isfinite(U)):
        raise LinalgError("reorthonormalize input has non-finite entries")
    Q1, R1 = _weighted_mgs(U, w, check=True)
    Q2, R2 = _weighted_mgs(Q1, w, check=False)
    return Q2, R2 @ R1


def numerical_rank(lam: np.ndarray) -> int:
    """Count of Gram eigenvalues above the numerical-zero threshold."""
    if lam.size == 0 or lam[0] <= 0.0:
        return 0
    return int(np.count_nonzero(lam > GRAM_RTOL * lam[0]))


def truncated_svd_weighted(
    V: np.ndarray, weights: QuadratureWeights, r: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Best weighted rank-r approximation V ≈ U Σ Yᵀ.

    The dominant subspace comes from the eigen-decomposition of the smaller weighted
    correlation matrix (method of snapshots). The factors are then polished inside that
    subspace by weighted QR on both sides and a Jacobi SVD of the r×r core, which
    keeps U and Y orthonormal to round-off even for widely spread singular values.

    Args:
        V: Matrix n×s.
        weights: Quadrature weights matching V.
        r: Target rank, 1 ≤ r ≤ min(n, s).

    Returns:
        U (n×r), Sigma (r×r diagonal, descending), Y (s×r).
    """
    V = np.asarray(V, dtype=float)
    n, s = V.shape
    if (n, s) != (weights.n, weights.s):
        raise LinalgError(
            f"matrix shape {V.shape} does not match weights ({weights.n}, {weights.s})"
        )
    if r < 1 or r > min(n, s):
        raise LinalgError(f"rank r={r} must lie in [1, {min(n, s)}]")

    sx = np.sqrt(weights.wx)
    sxi = np.sqrt(weights.wxi)
    Vt = sx[:, None] * V * sxi[None, :]

    if s <= n:
        Psi, lam = sym_eig(Vt.T @ Vt)
    else:
        Psi, lam = sym_eig(Vt @ Vt.T)
    achievable = numerical_rank(lam)
    if achievable < r:
        raise RankDeficiencyError(
            f"matrix has numerical rank {achievable}, below requested rank {r}",
            achievable=achievable,
            deficient=r - achievable,
        )

    if s <= n:
        Ut = Vt @ Psi[:, :r] / np.sqrt(lam[:r])
    else:
        Ut = Psi[:, :r]
    U0, _ = reorthonormalize(Ut / sx[:, None], weights.wx)
    B = weighted_inner(U0, V, weights.wx)
    Y0, T = reorthonormalize(B.T, weights.wxi)
    left, sigma, right = jacobi_svd(T.T)
    U = U0 @ left
    Y = Y0 @ right
    peak = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[peak, np.arange(r)] < 0.0, -1.0, 1.0)
    return U * signs, np.diag(sigma), Y * signs
