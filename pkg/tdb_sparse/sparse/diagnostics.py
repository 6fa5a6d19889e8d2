"""Dense checks of the interpolated RHS against the assembled one (test scale)."""

import logging
from dataclasses import dataclass

import numpy as np

from tdb_sparse.linalg import LinalgError, lu_solve_checked
from tdb_sparse.models.state import QuadratureWeights
from tdb_sparse.sampling import selection_eta
from tdb_sparse.sparse.interp import LowRankRHS, compute_YF

logger = logging.getLogger(__name__)

# slack for round-off when comparing the error with its bound
_BOUND_SLACK = 1e-10


@dataclass(frozen=True)
class CURDiagnostics:
    """
    Quality of one interpolated RHS, measured in the weight-scaled Euclidean space.

    Attributes:
        err2: Spectral norm of F − F̂.
        bound: (eta_p + eta_q)·sigma_next.
        sigma_next: Singular value σ_{p+1} of F (0 when F has no more directions).
        eta_p: Amplification of the row interpolation.
        eta_q: Amplification of the column sampling.
        holds: Whether err2 ≤ bound up to round-off.
        exactness: max |F̂(prow,q) − F(prow,q)| / max |F|.
        oblique_residual: Relative Frobenius distance between F̂ and 𝓟F𝓠.
        sigma_f: Leading singular values of F.
        sigma_fhat: Singular values of F̂.
    """

    err2: float
    bound: float
    sigma_next: float
    eta_p: float
    eta_q: float
    holds: bool
    exactness: float
    oblique_residual: float
    sigma_f: np.ndarray
    sigma_fhat: np.ndarray


def _oblique(lr: LowRankRHS, F: np.ndarray) -> np.ndarray:
    """𝓟 F 𝓠 with 𝓟 = U_F (PᵀU_F)⁻¹Pᵀ and 𝓠 = Q (Z_FᵀQ)⁻¹ Z_Fᵀ."""
    core = F[np.ix_(lr.prow, lr.q)]
    left = lu_solve_checked(lr.UF[lr.prow, :], core, what="UF(prow,:)")
    middle = lu_solve_checked(lr.ZF[lr.q, :], left.T, what="ZF(q,:)").T
    return lr.UF @ middle @ lr.ZF.T


def cur_diagnostics(
    lr: LowRankRHS, F_oracle: np.ndarray, weights: QuadratureWeights
) -> CURDiagnostics:
    """
    Compare F̂ with the materialized F.

    A violated error bound is logged as a warning and reported through `holds`.

    Args:
        lr: Interpolated RHS.
        F_oracle: Assembled RHS n×s.
        weights: Quadrature weights.

    Returns:
        CURDiagnostics.
    """
    F = np.asarray(F_oracle, dtype=float)
    sx = np.sqrt(weights.wx)[:, None]
    sxi = np.sqrt(weights.wxi)[None, :]
    Fhat = lr.reconstruct()
    scale = float(np.max(np.abs(F))) if F.size else 0.0

    sigma_f = np.linalg.svd(sx * F * sxi, compute_uv=False)
    err2 = float(np.linalg.norm(sx * (F - Fhat) * sxi, 2)) if F.size else 0.0
    p = lr.p
    sigma_next = float(sigma_f[p]) if p < sigma_f.shape[0] else 0.0

    if lr.rank == 0:
        eta_p = eta_q = 0.0
        exactness = 0.0 if scale == 0.0 else float(np.max(np.abs(F[:, lr.q]))) / scale
        oblique = 0.0
    else:
        eta_p = selection_eta(sx * lr.UF, lr.prow).value
        YF, _ = compute_YF(lr.ZF, weights.wxi, truncate=True)
        eta_q = selection_eta(sxi.T * YF, lr.q).value
        block = np.ix_(lr.prow, lr.q)
        exactness = float(np.max(np.abs(Fhat[block] - F[block])))
        exactness = exactness / scale if scale > 0.0 else exactness
        norm = float(np.linalg.norm(Fhat))
        if lr.truncated:
            oblique = float("nan")
        else:
            try:
                oblique = float(np.linalg.norm(Fhat - _oblique(lr, F))) / max(norm, 1e-300)
            except LinalgError:
                oblique = float("inf")

    bound = (eta_p + eta_q) * sigma_next
    holds = err2 <= bound + _BOUND_SLACK * float(sigma_f[0])
    if not holds:
        logger.warning(
            "interpolation error %.6e exceeds (eta_p + eta_q) sigma_{p+1} = %.6e", err2, bound
        )
    return CURDiagnostics(
        err2=err2,
        bound=bound,
        sigma_next=sigma_next,
        eta_p=float(eta_p),
        eta_q=float(eta_q),
        holds=bool(holds),
        exactness=exactness,
        oblique_residual=oblique,
        sigma_f=sigma_f[: p + 2].copy(),
        sigma_fhat=lr.sigma_z.copy(),
    )
