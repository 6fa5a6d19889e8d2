"""
On-the-fly low-rank interpolation of the RHS matrix and the compressed DBO equations.

The RHS F(UΣYᵀ) is never assembled. Its low-rank surrogate F̂ = U_F Z_Fᵀ is built from
p sampled columns (which give the spatial basis U_F) and p sampled rows (which give
the coefficients Z_F by interpolation), and the DBO derivative is computed from the
two skinny factors.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from tdb_sparse.core.dbo import check_sigma, times_sigma_inv, times_sigma_inv_t
from tdb_sparse.linalg import (
    LinalgError,
    RankDeficiencyError,
    lu_solve_checked,
    numerical_rank,
    reorthonormalize,
    sym_eig,
    weighted_inner,
)
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights
from tdb_sparse.physics.base import Model
from tdb_sparse.sampling import Sampler, SelectionError, ldeim_select, select

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LowRankRHS:
    """
    Interpolated RHS F̂ = U_F Z_Fᵀ of one evaluation.

    Attributes:
        UF: Spatial RHS basis (n×k), orthonormal under W_x.
        ZF: Random coefficients (s×k).
        q: Sampled columns (length p).
        prow: Sampled rows (length k).
        LambdaF: Eigenvalues of F(:,q)ᵀ W_x F(:,q), descending (length k).
        sigma_z: Singular values of F̂ padded with zeros to length p, descending.

    k equals p unless the sampled columns were numerically rank deficient.
    """

    UF: np.ndarray
    ZF: np.ndarray
    q: np.ndarray
    prow: np.ndarray
    LambdaF: np.ndarray
    sigma_z: np.ndarray

    @property
    def p(self) -> int:
        return int(self.q.shape[0])

    @property
    def rank(self) -> int:
        return int(self.UF.shape[1])

    @property
    def truncated(self) -> bool:
        return self.rank < self.p

    def reconstruct(self) -> np.ndarray:
        """Dense F̂ (test scale only)."""
        return self.UF @ self.ZF.T


@dataclass(frozen=True)
class RHSBasisCarry:
    """
    Random coefficients Z_F carried from the previous accepted step.

    At t=0 the stochastic modes Y stand in for Z_F. The W_ξ-orthonormal basis YF of
    the carried coefficients, used to select columns, and the singular values sigma_z
    of the carried F̂ are computed once on construction.
    """

    ZF_prev: np.ndarray
    YF: np.ndarray
    sigma_z: np.ndarray

    @classmethod
    def from_coefficients(cls, ZF: np.ndarray, wxi: np.ndarray) -> "RHSBasisCarry":
        YF, sigma_z = compute_YF(ZF, wxi, truncate=True)
        return cls(ZF_prev=np.asarray(ZF, dtype=float), YF=YF, sigma_z=sigma_z)

    @property
    def p(self) -> int:
        return int(self.ZF_prev.shape[1])


def _gram_basis(
    M: np.ndarray, w: np.ndarray, truncate: bool, what: str
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Eigen-decomposition of Mᵀ diag(w) M, checked for numerical rank."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[0] != w.shape[0]:
        raise LinalgError(f"{what} has {M.shape[0]} rows, weights have {w.shape[0]}")
    Psi, lam = sym_eig(weighted_inner(M, M, w))
    k = numerical_rank(lam)
    p = M.shape[1]
    if k < p and not truncate:
        raise RankDeficiencyError(
            f"{what} has numerical rank {k} of {p} columns",
            achievable=k,
            deficient=p - k,
        )
    return Psi, lam, k


def compute_YF(
    ZF: np.ndarray, wxi: np.ndarray, truncate: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Right singular vectors and singular values of F̂ from its coefficients.

    With C_Z = Z_Fᵀ W_ξ Z_F = Ψ_Z Σ_Z² Ψ_Zᵀ, YF = Z_F Ψ_Z Σ_Z⁻¹.

    Args:
        ZF: Coefficients s×p.
        wxi: Probability weights.
        truncate: Keep only the numerically nonzero directions instead of raising.

    Returns:
        (YF s×k, sigma_z of length p, zero-padded past k).

    Raises:
        RankDeficiencyError: If ZF is rank deficient and truncate is False.
    """
    wxi = np.asarray(wxi, dtype=float)
    Psi, lam, k = _gram_basis(ZF, wxi, truncate, "ZF")
    sigma = np.sqrt(np.maximum(lam, 0.0))
    sigma[k:] = 0.0
    ZF = np.asarray(ZF, dtype=float).reshape(wxi.shape[0], -1)
    YF = ZF @ Psi[:, :k] / sigma[:k]
    return YF, sigma


def compute_UF(
    Fq: np.ndarray, wx: np.ndarray, truncate: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted-orthonormal basis of the sampled RHS columns.

    UF = F(:,q) Ψ_F Λ_F^{-1/2}, followed by one weighted Gram-Schmidt polish.

    Args:
        Fq: Sampled RHS columns n×p.
        wx: Spatial weights.
        truncate: Keep only the numerically nonzero directions instead of raising.

    Returns:
        (UF n×k, LambdaF of length k).

    Raises:
        RankDeficiencyError: If the sampled columns are collinear and truncate is False.
    """
    wx = np.asarray(wx, dtype=float)
    Psi, lam, k = _gram_basis(Fq, wx, truncate, "sampled RHS columns")
    Fq = np.asarray(Fq, dtype=float).reshape(wx.shape[0], -1)
    if k == 0:
        return np.zeros((Fq.shape[0], 0)), np.zeros(0)
    UF = Fq @ Psi[:, :k] / np.sqrt(lam[:k])
    UF, _ = reorthonormalize(UF, wx)
    return UF, lam[:k].copy()


def compute_ZF(Fp: np.ndarray, UF: np.ndarray, prow: np.ndarray) -> np.ndarray:
    """
    Interpolation coefficients with ZFᵀ = UF(prow,:)⁻¹ F(prow,:).

    Raises:
        SelectionError: If UF(prow,:) is singular.
    """
    Fp = np.asarray(Fp, dtype=float)
    if Fp.ndim == 1:
        Fp = Fp[None, :]
    try:
        return lu_solve_checked(UF[np.asarray(prow, dtype=np.intp), :], Fp, what="UF(prow,:)").T
    except LinalgError as e:
        raise SelectionError(f"row selection failed: {e}") from e


def compressed_derivative(
    state: DBOState, UF: np.ndarray, ZF: np.ndarray, weights: QuadratureWeights
) -> DBODerivative:
    """
    DBO derivative driven by F̂ = UF ZFᵀ.

    With A = ZFᵀ W_ξ Y and B = Uᵀ W_x UF: dΣ = B A, dU = (UF − U B) A Σ⁻¹ and
    dY = (ZF − Y Aᵀ) Bᵀ Σ⁻ᵀ. Peak temporary size is max(n, s)×k.
    """
    U, Sigma, Y = state.U, state.Sigma, state.Y
    check_sigma(Sigma)
    A = weighted_inner(ZF, Y, weights.wxi)
    B = weighted_inner(U, UF, weights.wx)
    dSigma = B @ A
    dU = (UF - U @ B) @ times_sigma_inv(A, Sigma)
    dY = (ZF - Y @ A.T) @ times_sigma_inv_t(B.T, Sigma)
    return DBODerivative(dU=dU, dSigma=dSigma, dY=dY)


def select_columns(carry: RHSBasisCarry, p: int, sampler: Sampler) -> np.ndarray:
    """
    p sample columns from the carried basis.

    A carried basis with fewer than p directions is extended with L-DEIM; a wider one
    loses its trailing directions.
    """
    if carry.YF.shape[1] >= p:
        return select(sampler, carry.YF[:, :p]).indices
    if carry.YF.shape[1] == 0:
        raise SelectionError("carried RHS basis is empty")
    return ldeim_select(carry.YF, p).indices


def sparse_rhs(
    state: DBOState,
    model: Model,
    carry: RHSBasisCarry,
    p: int,
    sampler: Sampler,
    weights: QuadratureWeights,
    columns: Optional[np.ndarray] = None,
    rows: Optional[np.ndarray] = None,
) -> Tuple[DBODerivative, LowRankRHS]:
    """
    DBO derivative from the interpolated RHS.

    Args:
        state: Current (stage) state.
        model: Physics model.
        carry: Coefficients of the previous accepted step.
        p: Interpolation rank.
        sampler: DEIM or Q-DEIM, used for both columns and rows.
        weights: Quadrature weights.
        columns: Column indices to use instead of selecting from the carry.
        rows: Row indices to use instead of selecting from UF.

    Returns:
        (derivative, low-rank RHS). A numerically zero sampled RHS gives a zero
        derivative and an empty basis.
    """
    if columns is None:
        q = select_columns(carry, p, sampler)
    else:
        q = np.asarray(columns, dtype=np.intp)

    Fq = model.rhs_columns(state.columns(q), state.t, samples=q)
    UF, LambdaF = compute_UF(Fq, weights.wx, truncate=True)
    k = UF.shape[1]
    if k == 0:
        logger.debug("t=%.6g: sampled RHS columns vanish", state.t)
        empty = LowRankRHS(
            UF=UF,
            ZF=np.zeros((weights.s, 0)),
            q=q,
            prow=np.zeros(0, dtype=np.intp),
            LambdaF=LambdaF,
            sigma_z=np.zeros(q.shape[0]),
        )
        return DBODerivative.zeros_like(state), empty
    if k < q.shape[0]:
        logger.debug("t=%.6g: sampled RHS columns truncated to rank %d of %d", state.t, k, p)

    if rows is None or len(rows) != k:
        prow = select(sampler, UF).indices
    else:
        prow = np.asarray(rows, dtype=np.intp)

    closure = model.closure(prow)
    Fp = model.rhs_rows(prow, state.rows(closure), state.t)
    ZF = compute_ZF(Fp, UF, prow)

    _, sigma_z = compute_YF(ZF, weights.wxi, truncate=True)
    sigma_full = np.zeros(q.shape[0])
    sigma_full[: sigma_z.shape[0]] = sigma_z
    lowrank = LowRankRHS(UF=UF, ZF=ZF, q=q, prow=prow, LambdaF=LambdaF, sigma_z=sigma_full)
    return compressed_derivative(state, UF, ZF, weights), lowrank
