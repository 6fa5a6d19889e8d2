"""DBO state initialization, decompressed evolution equations and diagnostics."""

import logging
from typing import Protocol, Tuple

import numpy as np

from tdb_sparse.errors import TDBError
from tdb_sparse.linalg import (
    LinalgError,
    lu_solve_checked,
    singular_values_small,
    truncated_svd_weighted,
    weighted_frobenius,
    weighted_inner,
)
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights

logger = logging.getLogger(__name__)

SIGMA_RTOL = 1e-12
DEFAULT_BLOCK_ROWS = 4096


class SingularSigmaError(TDBError):
    """Σ became numerically singular during evolution."""

    def __init__(self, message: str, rank: int) -> None:
        super().__init__(message)
        self.rank = rank


class LinearModel(Protocol):
    """A model exposing its linear action column by column."""

    def linear_action(self, U: np.ndarray) -> np.ndarray: ...


def check_sigma(Sigma: np.ndarray) -> None:
    """
    Reject a numerically singular Σ.

    Raises:
        SingularSigmaError: If σ_min/σ_max < 1e-12 or Σ is not finite.
    """
    r = Sigma.shape[0]
    if not np.all(np.isfinite(Sigma)):
        raise SingularSigmaError(f"Sigma has non-finite entries at rank r={r}", rank=r)
    sigma = singular_values_small(Sigma)
    if sigma[0] == 0.0 or sigma[-1] < SIGMA_RTOL * sigma[0]:
        ratio = 0.0 if sigma[0] == 0.0 else sigma[-1] / sigma[0]
        raise SingularSigmaError(
            f"Sigma is singular at rank r={r} (sigma_min/sigma_max = {ratio:.3e})", rank=r
        )


def times_sigma_inv(A: np.ndarray, Sigma: np.ndarray) -> np.ndarray:
    """A Σ⁻¹ through an LU solve with Σᵀ."""
    try:
        return lu_solve_checked(Sigma.T, A.T, what="Sigma").T
    except LinalgError as e:
        raise SingularSigmaError(str(e), rank=Sigma.shape[0]) from e


def times_sigma_inv_t(A: np.ndarray, Sigma: np.ndarray) -> np.ndarray:
    """A Σ⁻ᵀ through an LU solve with Σ."""
    try:
        return lu_solve_checked(Sigma, A.T, what="Sigma").T
    except LinalgError as e:
        raise SingularSigmaError(str(e), rank=Sigma.shape[0]) from e


def init_from_samples(V0: np.ndarray, r: int, weights: QuadratureWeights) -> DBOState:
    """
    Rank-r DBO state from the sampled initial condition.

    Args:
        V0: Initial ensemble n×s.
        r: DBO rank.
        weights: Quadrature weights.

    Returns:
        DBOState at t=0 built from the weighted truncated SVD of V0.

    Raises:
        RankDeficiencyError: If V0 has numerical rank below r (lists the achievable rank).
    """
    U, Sigma, Y = truncated_svd_weighted(V0, weights, r)
    state = DBOState(U=U, Sigma=Sigma, Y=Y, t=0.0)
    residual = total_error(state, V0, weights)
    logger.info(
        "initial truncation to rank %d: residual %.6e (relative %.3e)",
        r,
        residual,
        residual / max(weighted_frobenius(V0, weights), np.finfo(float).tiny),
    )
    return state


def dbo_rhs_decompressed(
    state: DBOState, F: np.ndarray, weights: QuadratureWeights
) -> DBODerivative:
    """
    DBO evolution equations with the full right-hand-side matrix F.

    dΣ = Uᵀ W_x F W_ξ Y, dU = (I − U Uᵀ W_x) F W_ξ Y Σ⁻¹ and
    dY = (I − Y Yᵀ W_ξ) Fᵀ W_x U Σ⁻ᵀ, with every projector applied as two skinny
    products.
    """
    U, Sigma, Y = state.U, state.Sigma, state.Y
    if F.shape != (U.shape[0], Y.shape[0]):
        raise LinalgError(
            f"RHS shape {F.shape} does not match state ({U.shape[0]}, {Y.shape[0]})"
        )
    check_sigma(Sigma)
    G = F @ (weights.wxi[:, None] * Y)
    H = F.T @ (weights.wx[:, None] * U)
    dSigma = weighted_inner(U, G, weights.wx)
    dU = times_sigma_inv(G - U @ dSigma, Sigma)
    dY = times_sigma_inv_t(H - Y @ weighted_inner(Y, H, weights.wxi), Sigma)
    return DBODerivative(dU=dU, dSigma=dSigma, dY=dY)


def reduced_linear_matrix(
    model: LinearModel, U: np.ndarray, weights: QuadratureWeights
) -> np.ndarray:
    """Reduced linear operator L_r = Uᵀ W_x L U."""
    return weighted_inner(U, model.linear_action(U), weights.wx)


def total_error(
    state: DBOState,
    V_fom: np.ndarray,
    weights: QuadratureWeights,
    block_rows: int = DEFAULT_BLOCK_ROWS,
) -> float:
    """
    Weighted Frobenius distance between U Σ Yᵀ and a full-order ensemble.

    The reconstruction is streamed in row blocks; partial sums are added in block order.
    """
    n, s = state.U.shape[0], state.Y.shape[0]
    if V_fom.shape != (n, s):
        raise LinalgError(f"reference shape {V_fom.shape} does not match state ({n}, {s})")
    SYt = state.Sigma @ state.Y.T
    total = 0.0
    for start in range(0, n, max(1, block_rows)):
        stop = min(n, start + max(1, block_rows))
        diff = state.U[start:stop] @ SYt - V_fom[start:stop]
        total += float(weights.wx[start:stop] @ (diff * diff) @ weights.wxi)
    return float(np.sqrt(total))


def singular_values(state: DBOState) -> np.ndarray:
    """Singular values of Σ, descending."""
    return singular_values_small(state.Sigma)


def orthonormality_defect(state: DBOState, weights: QuadratureWeights) -> Tuple[float, float]:
    """Max-norm deviations of Uᵀ W_x U and Yᵀ W_ξ Y from the identity."""
    r = state.rank
    eye = np.eye(r)
    du = float(np.max(np.abs(weighted_inner(state.U, state.U, weights.wx) - eye)))
    dy = float(np.max(np.abs(weighted_inner(state.Y, state.Y, weights.wxi) - eye)))
    return du, dy


def mean_and_variance(
    state: DBOState, weights: QuadratureWeights
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample mean and variance fields of U Σ Yᵀ without forming it.

    Returns:
        (mean, variance), both of length n.
    """
    m = state.Y.T @ weights.wxi
    mean = state.U @ (state.Sigma @ m)
    C = state.Sigma @ state.Sigma.T
    second = np.einsum("ij,jk,ik->i", state.U, C, state.U)
    return mean, np.maximum(second - mean * mean, 0.0)


def ensemble_singular_values(
    V: np.ndarray, weights: QuadratureWeights, r: int
) -> np.ndarray:
    """Leading r weighted singular values of a full ensemble (KL spectrum)."""
    scaled = np.sqrt(weights.wx)[:, None] * V * np.sqrt(weights.wxi)[None, :]
    return np.linalg.svd(scaled, compute_uv=False)[:r]


def ensemble_moments(V: np.ndarray, weights: QuadratureWeights) -> Tuple[np.ndarray, np.ndarray]:
    """Sample mean and variance fields of a full ensemble."""
    mean = V @ weights.wxi
    return mean, np.maximum((V * V) @ weights.wxi - mean * mean, 0.0)


def low_rank_distance(a: DBOState, b: DBOState, weights: QuadratureWeights) -> float:
    """
    Weighted Frobenius norm of Ua Σa Yaᵀ − Ub Σb Ybᵀ without forming either product.

    Both sides are stacked and reduced by Householder QR, so nearly equal states do not
    lose accuracy to cancellation of squared norms.
    """
    if a.U.shape[0] != b.U.shape[0] or a.Y.shape[0] != b.Y.shape[0]:
        raise LinalgError("states live on different grids or sample sets")
    sx = np.sqrt(weights.wx)[:, None]
    sxi = np.sqrt(weights.wxi)[:, None]
    _, Ru = np.linalg.qr(sx * np.hstack([a.U, b.U]))
    _, Ry = np.linalg.qr(sxi * np.hstack([a.Y, b.Y]))
    ra, rb = a.rank, b.rank
    core = np.zeros((ra + rb, ra + rb))
    core[:ra, :ra] = a.Sigma
    core[ra:, ra:] = -b.Sigma
    return float(np.linalg.norm(Ru @ core @ Ry.T))
