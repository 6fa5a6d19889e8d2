"""Interpolation index selection: DEIM, Q-DEIM and L-DEIM."""

from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from tdb_sparse.errors import TDBError
from tdb_sparse.linalg import LinalgError, lu_solve_checked, pivoted_qr, singular_values_small

# a DEIM residual this small relative to its column is an exact collinearity
_RESIDUAL_RTOL = 1e-14

# sampled blocks with condition number above 1/_ETA_RTOL count as singular
_ETA_RTOL = 1e-14


class SelectionError(TDBError):
    """Interpolation index selection failures."""

    pass


class Sampler(str, Enum):
    """Index selection algorithm."""

    DEIM = "deim"
    QDEIM = "qdeim"


class EtaEstimate(NamedTuple):
    """Norm of the inverse of a sampled basis block; singular blocks give inf."""

    value: float
    singular: bool


@dataclass(frozen=True)
class SelectionResult:
    """
    Selected interpolation indices.

    Attributes:
        indices: Distinct indices in selection order.
        eta: ‖(Psi(indices,:))⁺‖₂, the error amplification of the interpolant.
    """

    indices: np.ndarray
    eta: float

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def _as_basis(Psi: np.ndarray) -> np.ndarray:
    Psi = np.asarray(Psi, dtype=float)
    if Psi.ndim == 1:
        Psi = Psi[:, None]
    if Psi.ndim != 2 or Psi.shape[1] < 1:
        raise SelectionError(f"basis must be a non-empty matrix, got shape {Psi.shape}")
    m, p = Psi.shape
    if p > m:
        raise SelectionError(f"cannot select {p} indices from {m} rows")
    return Psi


def _deim(Psi: np.ndarray) -> Tuple[List[int], np.ndarray]:
    """Greedy DEIM; also returns the deflated basis [ψ1, r2, ..., rp]."""
    m, p = Psi.shape
    deflated = np.empty_like(Psi)
    deflated[:, 0] = Psi[:, 0]
    first = int(np.argmax(np.abs(Psi[:, 0])))
    if Psi[first, 0] == 0.0:
        raise SelectionError("first basis column is identically zero")
    indices = [first]

    for j in range(1, p):
        rows = np.array(indices)
        try:
            c = lu_solve_checked(Psi[rows, :j], Psi[rows, j], what="DEIM interpolation system")
        except LinalgError as e:
            raise SelectionError(str(e)) from e
        residual = Psi[:, j] - Psi[:, :j] @ c
        k = int(np.argmax(np.abs(residual)))
        scale = float(np.max(np.abs(Psi[:, j])))
        if abs(residual[k]) <= _RESIDUAL_RTOL * scale:
            raise SelectionError(f"basis column {j} is collinear with the previous columns")
        deflated[:, j] = residual
        indices.append(k)

    return indices, deflated


def selection_eta(Psi: np.ndarray, indices: Sequence[int]) -> EtaEstimate:
    """
    Spectral norm of the (pseudo-)inverse of Psi(indices,:).

    Args:
        Psi: Basis m×p.
        indices: Selected rows, at least p of them.

    Returns:
        EtaEstimate; value is inf and singular is True for a singular block.
    """
    Psi = np.asarray(Psi, dtype=float)
    if Psi.ndim == 1:
        Psi = Psi[:, None]
    block = Psi[np.asarray(indices, dtype=np.intp), :]
    if block.shape[0] < block.shape[1]:
        raise SelectionError(
            f"need at least {block.shape[1]} rows to invert, got {block.shape[0]}"
        )
    sigma = singular_values_small(block)
    if sigma[-1] <= 0.0 or sigma[-1] <= _ETA_RTOL * sigma[0]:
        return EtaEstimate(float("inf"), True)
    return EtaEstimate(float(1.0 / sigma[-1]), False)


def deim_select(Psi: np.ndarray) -> SelectionResult:
    """
    Greedy DEIM selection.

    Index j is the largest-magnitude entry of the residual of ψ_j after interpolating
    it with the first j-1 columns at the indices chosen so far (lowest index on ties).

    Args:
        Psi: Basis m×p with linearly independent columns.

    Returns:
        SelectionResult with p indices.

    Raises:
        SelectionError: On a singular interpolation system.
    """
    Psi = _as_basis(Psi)
    indices, _ = _deim(Psi)
    return SelectionResult(np.array(indices, dtype=np.intp), selection_eta(Psi, indices).value)


def qdeim_select(Psi: np.ndarray) -> SelectionResult:
    """First p column pivots of the pivoted QR of Psiᵀ."""
    Psi = _as_basis(Psi)
    _, _, pivot = pivoted_qr(Psi.T)
    indices = pivot[: Psi.shape[1]].astype(np.intp)
    return SelectionResult(indices, selection_eta(Psi, indices).value)


def ldeim_select(Psi: np.ndarray, target: int) -> SelectionResult:
    """
    DEIM extended to more indices than basis columns.

    The first p indices are the DEIM indices; the remaining target-p are the rows of
    the deflated basis with the largest norms, excluding those already chosen.

    Args:
        Psi: Basis m×p.
        target: Total number of indices, p ≤ target ≤ m.

    Returns:
        SelectionResult with target indices.
    """
    Psi = _as_basis(Psi)
    m, p = Psi.shape
    if target < p or target > m:
        raise SelectionError(f"target {target} must lie in [{p}, {m}]")
    indices, deflated = _deim(Psi)
    if target > p:
        scores = np.linalg.norm(deflated, axis=1)
        scores[indices] = -np.inf
        order = np.argsort(-scores, kind="stable")
        indices.extend(int(i) for i in order[: target - p])
    return SelectionResult(np.array(indices, dtype=np.intp), selection_eta(Psi, indices).value)


def select(sampler: Sampler, Psi: np.ndarray) -> SelectionResult:
    """Dispatch to the configured selector."""
    if sampler == Sampler.QDEIM:
        return qdeim_select(Psi)
    return deim_select(Psi)
