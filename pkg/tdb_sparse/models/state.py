"""State models for the DBO triplet and its quadrature weights."""

from dataclasses import dataclass, replace
from typing import Dict, Sequence

import numpy as np


@dataclass(frozen=True)
class QuadratureWeights:
    """
    Diagonal weights of the discrete space and probability inner products.

    Attributes:
        wx: Spatial weights, one positive cell measure per grid row (length n).
        wxi: Probability weights, one positive mass per sample (length s), summing to one.
    """

    wx: np.ndarray
    wxi: np.ndarray

    def __post_init__(self) -> None:
        wx = np.ascontiguousarray(self.wx, dtype=float)
        wxi = np.ascontiguousarray(self.wxi, dtype=float)
        if wx.ndim != 1 or wxi.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if np.any(wx <= 0.0) or np.any(wxi <= 0.0):
            raise ValueError("weights must be strictly positive")
        if abs(float(wxi.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probability weights sum to {wxi.sum():.17g}, expected 1")
        object.__setattr__(self, "wx", wx)
        object.__setattr__(self, "wxi", wxi)

    @property
    def n(self) -> int:
        return int(self.wx.shape[0])

    @property
    def s(self) -> int:
        return int(self.wxi.shape[0])

    @classmethod
    def monte_carlo(cls, wx: np.ndarray, s: int) -> "QuadratureWeights":
        """Spatial weights paired with equal Monte Carlo masses 1/s."""
        return cls(wx=np.asarray(wx, dtype=float), wxi=np.full(s, 1.0 / s))


@dataclass(frozen=True)
class DBOState:
    """
    Rank-r DBO approximation V ≈ U Σ Yᵀ at time t.

    Attributes:
        U: Spatial modes (n×r), orthonormal under W_x.
        Sigma: Factorized correlation (r×r), invertible while evolving.
        Y: Stochastic modes (s×r), orthonormal under W_ξ.
        t: Time of the state.
    """

    U: np.ndarray
    Sigma: np.ndarray
    Y: np.ndarray
    t: float = 0.0

    @property
    def rank(self) -> int:
        return int(self.Sigma.shape[0])

    def reconstruct(self) -> np.ndarray:
        """Dense U Σ Yᵀ (test scale only)."""
        return self.U @ self.Sigma @ self.Y.T

    def rows(self, index: np.ndarray) -> np.ndarray:
        """Reconstructed rows U(index,:) Σ Yᵀ."""
        return self.U[index, :] @ self.Sigma @ self.Y.T

    def columns(self, index: np.ndarray) -> np.ndarray:
        """Reconstructed columns U Σ Y(index,:)ᵀ."""
        return self.U @ (self.Sigma @ self.Y[index, :].T)

    def advance(self, derivative: "DBODerivative", h: float) -> "DBOState":
        """Explicit Euler-like update used by Runge-Kutta stages."""
        return DBOState(
            U=self.U + h * derivative.dU,
            Sigma=self.Sigma + h * derivative.dSigma,
            Y=self.Y + h * derivative.dY,
            t=self.t + h,
        )

    def with_time(self, t: float) -> "DBOState":
        return replace(self, t=t)

    def to_dict(self) -> Dict:
        """Shape summary for manifests and logs."""
        return {"n": self.U.shape[0], "s": self.Y.shape[0], "r": self.rank, "t": self.t}


@dataclass(frozen=True)
class DBODerivative:
    """Time derivative of the DBO triplet."""

    dU: np.ndarray
    dSigma: np.ndarray
    dY: np.ndarray

    @classmethod
    def zeros_like(cls, state: DBOState) -> "DBODerivative":
        return cls(
            dU=np.zeros_like(state.U),
            dSigma=np.zeros_like(state.Sigma),
            dY=np.zeros_like(state.Y),
        )

    def combine(
        self, others: Sequence["DBODerivative"], coeffs: Sequence[float]
    ) -> "DBODerivative":
        """Linear combination c0·self + Σ ci·others[i]."""
        dU = coeffs[0] * self.dU
        dSigma = coeffs[0] * self.dSigma
        dY = coeffs[0] * self.dY
        for other, c in zip(others, coeffs[1:]):
            dU = dU + c * other.dU
            dSigma = dSigma + c * other.dSigma
            dY = dY + c * other.dY
        return DBODerivative(dU=dU, dSigma=dSigma, dY=dY)
