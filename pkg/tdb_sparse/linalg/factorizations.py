"""Small dense factorizations: pivoted QR, Jacobi eigen/SVD and LU solves.

All factorized matrices in the engine are at most p×p or r×r (plus the one-off
method-of-snapshots correlation matrices), so the eigen and SVD kernels are plain
Jacobi sweeps over numpy arrays. LU solves go through scipy.
"""

import warnings
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from tdb_sparse.errors import TDBError

# Jacobi rotations are skipped once |a_pq| falls below this fraction of sqrt(|a_pp a_qq|)
_JACOBI_RTOL = 1e-15
# ... or below this fraction of ‖A‖_F, whichever is larger
_JACOBI_FLOOR = 1e-18
_MAX_SWEEPS = 60

SYMMETRY_TOL = 1e-12
SINGULAR_RTOL = 1e-12


class LinalgError(TDBError):
    """Linear-algebra failures (shape, symmetry, singularity)."""

    pass


class RankDeficiencyError(LinalgError):
    """Numerical rank below the requested rank."""

    def __init__(
        self,
        message: str,
        achievable: int,
        deficient: int,
        column: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.achievable = achievable
        self.deficient = deficient
        self.column = column


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """
    Flip columns so the largest-magnitude entry of each is positive.

    Args:
        vectors: Matrix whose columns are eigen or singular vectors.

    Returns:
        Sign-normalized copy.
    """
    if vectors.size == 0:
        return vectors.copy()
    peak = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[peak, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pivoted_qr(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Householder QR with column pivoting, M[:, pivot] = Q R.

    The pivot at step k is the remaining column with the largest norm (lowest index
    on ties), so |diag(R)| is non-increasing. Rank-deficient input gives trailing zero
    rows in R.

    Args:
        M: Matrix m×k.

    Returns:
        Q (m×min(m,k), orthonormal columns), R (min(m,k)×k, upper triangular), pivot.
    """
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise LinalgError(f"pivoted_qr needs a non-empty matrix, got shape {A.shape}")
    m, k = A.shape
    steps = min(m, k)
    Q = np.eye(m)
    pivot = np.arange(k)

    for j in range(steps):
        norms = np.linalg.norm(A[j:, j:], axis=0)
        best = j + int(np.argmax(norms))
        if best != j:
            A[:, [j, best]] = A[:, [best, j]]
            pivot[[j, best]] = pivot[[best, j]]

        x = A[j:, j]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += norm_x if x[0] >= 0.0 else -norm_x
        v /= np.linalg.norm(v)
        A[j:, j:] -= 2.0 * np.outer(v, v @ A[j:, j:])
        Q[:, j:] -= 2.0 * np.outer(Q[:, j:] @ v, v)
        A[j + 1 :, j] = 0.0

    return Q[:, :steps], np.triu(A[:steps, :]), pivot


def _round_robin(k: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Disjoint (p, q) index pairs covering every pair once per sweep."""
    m = k + (k % 2)
    order = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(order[i], order[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < k and b < k]
        if pairs:
            P = np.array([a for a, _ in pairs], dtype=np.intp)
            Q = np.array([b for _, b in pairs], dtype=np.intp)
            rounds.append((P, Q))
        order = [order[0], order[-1]] + order[1:-1]
    return rounds


def sym_eig(C: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric matrix by parallel-ordered cyclic Jacobi.

    Each round applies a set of disjoint plane rotations at once, so a sweep costs
    k-1 vectorized updates.

    Args:
        C: Symmetric matrix k×k (within 1e-12 of its transpose).

    Returns:
        Psi with orthonormal columns and Lambda sorted descending, C Psi = Psi diag(Lambda).

    Raises:
        LinalgError: If C is not square or not symmetric within tolerance.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise LinalgError(f"sym_eig needs a square matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise LinalgError("sym_eig input has non-finite entries")
    k = C.shape[0]
    scale = max(1.0, float(np.max(np.abs(C)))) if k else 1.0
    asym = float(np.max(np.abs(C - C.T))) if k else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise LinalgError(f"sym_eig input is not symmetric (max |C - Cᵀ| = {asym:.3e})")

    A = 0.5 * (C + C.T)
    V = np.eye(k)
    fro = float(np.linalg.norm(A))
    if k <= 1 or fro == 0.0:
        lam = np.diag(A).copy()
        return V, lam

    floor = _JACOBI_FLOOR * fro
    rounds = _round_robin(k)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for P, Q in rounds:
            apq = A[P, Q]
            app = A[P, P]
            aqq = A[Q, Q]
            active = np.abs(apq) > np.maximum(_JACOBI_RTOL * np.sqrt(np.abs(app * aqq)), floor)
            if not active.any():
                continue
            P, Q = P[active], Q[active]
            apq, app, aqq = apq[active], app[active], aqq[active]

            tau = (aqq - app) / (2.0 * apq)
            t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            Ap = A[:, P]
            Aq = A[:, Q]
            A[:, P] = c * Ap - s * Aq
            A[:, Q] = s * Ap + c * Aq
            Ap = A[P, :]
            Aq = A[Q, :]
            A[P, :] = c[:, None] * Ap - s[:, None] * Aq
            A[Q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[P, Q] = 0.0
            A[Q, P] = 0.0

            Vp = V[:, P]
            Vq = V[:, Q]
            V[:, P] = c * Vp - s * Vq
            V[:, Q] = s * Vp + c * Vq
            rotated = True
        if not rotated:
            break

    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    return fix_signs(V[:, order]), lam[order]


def jacobi_svd(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One-sided (Hestenes) Jacobi SVD for small matrices, M = L diag(sigma) Rᵀ.

    Singular values come out with high relative accuracy, which the Gram-matrix route
    cannot give. Left vectors of zero singular values are returned as zero columns.

    Args:
        M: Matrix m×k with k small.

    Returns:
        (L m×k, sigma descending, R k×k orthogonal).
    """
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2:
        raise LinalgError(f"jacobi_svd needs a matrix, got shape {A.shape}")
    k = A.shape[1]
    V = np.eye(k)

    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(k - 1):
            for j in range(i + 1, k):
                a = float(A[:, i] @ A[:, i])
                b = float(A[:, j] @ A[:, j])
                g = float(A[:, i] @ A[:, j])
                if g == 0.0 or abs(g) <= _JACOBI_RTOL * np.sqrt(a * b):
                    continue
                zeta = (b - a) / (2.0 * g)
                t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ai = A[:, i].copy()
                A[:, i] = c * ai - s * A[:, j]
                A[:, j] = s * ai + c * A[:, j]
                vi = V[:, i].copy()
                V[:, i] = c * vi - s * V[:, j]
                V[:, j] = s * vi + c * V[:, j]
                rotated = True
        if not rotated:
            break

    sigma = np.linalg.norm(A, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    A = A[:, order]
    V = V[:, order]
    L = np.zeros_like(A)
    nonzero = sigma > 0.0
    L[:, nonzero] = A[:, nonzero] / sigma[nonzero]

    # sign convention on the left vectors, right vectors follow
    ref = L if np.any(nonzero) else V
    peak = np.argmax(np.abs(ref), axis=0)
    signs = np.sign(ref[peak, np.arange(k)])
    signs[signs == 0] = 1.0
    return L * signs, sigma, V * signs


def singular_values_small(M: np.ndarray) -> np.ndarray:
    """Singular values of a small matrix, descending."""
    return jacobi_svd(M)[1]


def lu_solve_checked(A: np.ndarray, B: np.ndarray, what: str = "matrix") -> np.ndarray:
    """
    Solve A X = B through an LU factorization with partial pivoting.

    Args:
        A: Square matrix.
        B: Right-hand side (vector or matrix).
        what: Name used in the error message.

    Returns:
        X.

    Raises:
        LinalgError: If A is singular or the solve produces non-finite values.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise LinalgError(f"{what} must be square, got shape {A.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    if diag.size == 0 or np.any(diag == 0.0) or not np.all(np.isfinite(lu)):
        raise LinalgError(f"{what} is singular")
    X = lu_solve((lu, piv), np.asarray(B, dtype=float), check_finite=False)
    if not np.all(np.isfinite(X)):
        raise LinalgError(f"{what} is numerically singular")
    return X
