"""DBO right-hand-side providers for the Runge-Kutta stages."""

import logging
from typing import List, Optional, Tuple

import numpy as np

from tdb_sparse.core.dbo import dbo_rhs_decompressed
from tdb_sparse.models.records import SolverKind
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights
from tdb_sparse.physics.base import Model
from tdb_sparse.sampling import Sampler
from tdb_sparse.sparse import (
    LowRankRHS,
    RankController,
    RHSBasisCarry,
    adapt_rank,
    error_indicator,
    sparse_rhs,
)
from tdb_sparse.sparse.rank import RankControlError

logger = logging.getLogger(__name__)


class DecompressedProvider:
    """TDB derivative from the fully assembled RHS matrix F(U Σ Yᵀ)."""

    kind = SolverKind.TDB

    def __init__(self, model: Model, weights: QuadratureWeights) -> None:
        self.model = model
        self.weights = weights

    def assemble(self, state: DBOState) -> np.ndarray:
        """F evaluated on the reconstructed ensemble."""
        return self.model.rhs_columns(state.reconstruct(), state.t)

    def derivative(self, state: DBOState, stage: int) -> DBODerivative:
        return dbo_rhs_decompressed(state, self.assemble(state), self.weights)

    def accept(self, state: DBOState) -> Tuple[Optional[int], Optional[float]]:
        return None, None


class SparseProvider:
    """
    S-TDB derivative from the interpolated RHS.

    The carried coefficients are bootstrapped from Y and refreshed from the first
    stage of every accepted step. With stage_reuse the first-stage index sets are
    reused by the remaining stages. With a rank controller, p moves by at most one
    after each accepted step.

    Attributes:
        p: Current interpolation rank.
        last: Low-rank RHS of the most recent first stage.
        eps: Error indicator after the most recent accepted step.
    """

    kind = SolverKind.STDB

    def __init__(
        self,
        model: Model,
        weights: QuadratureWeights,
        p: int,
        sampler: Sampler = Sampler.DEIM,
        stage_reuse: bool = False,
        controller: Optional[RankController] = None,
    ) -> None:
        self.model = model
        self.weights = weights
        self.sampler = sampler
        self.stage_reuse = stage_reuse
        self.controller = controller
        self.p = controller.p if controller is not None else p
        self.carry: Optional[RHSBasisCarry] = None
        self.last: Optional[LowRankRHS] = None
        self.eps: Optional[float] = None
        self.rank_history: List[Tuple[float, int, float]] = []
        self._stage_one: Optional[LowRankRHS] = None
        self._plan: Optional[np.ndarray] = None
        self._warned_truncation = False

    def bootstrap(self, state: DBOState) -> LowRankRHS:
        """Seed the carry with Y, then run the pipeline once to get the first Z_F."""
        self.carry = RHSBasisCarry.from_coefficients(state.Y, self.weights.wxi)
        _, lowrank = sparse_rhs(state, self.model, self.carry, self.p, self.sampler, self.weights)
        self._refresh(lowrank)
        logger.debug("bootstrap at t=%.6g: q=%s", state.t, lowrank.q.tolist())
        return lowrank

    def _refresh(self, lowrank: LowRankRHS) -> None:
        if lowrank.rank > 0:
            self.carry = RHSBasisCarry.from_coefficients(lowrank.ZF, self.weights.wxi)
        self.last = lowrank
        if lowrank.truncated and not self._warned_truncation:
            logger.warning(
                "sampled RHS columns have numerical rank %d < p=%d; U_F truncated",
                lowrank.rank,
                lowrank.p,
            )
            self._warned_truncation = True

    def _current_carry(self, state: DBOState) -> RHSBasisCarry:
        if self.carry is None:
            self.bootstrap(state)
        return self.carry  # type: ignore[return-value]

    def derivative(self, state: DBOState, stage: int) -> DBODerivative:
        carry = self._current_carry(state)
        columns: Optional[np.ndarray] = None
        rows: Optional[np.ndarray] = None
        if stage == 0:
            columns, self._plan = self._plan, None
        elif self.stage_reuse and self._stage_one is not None:
            columns, rows = self._stage_one.q, self._stage_one.prow
        derivative, lowrank = sparse_rhs(
            state,
            self.model,
            carry,
            self.p,
            self.sampler,
            self.weights,
            columns=columns,
            rows=rows,
        )
        if stage == 0:
            self._stage_one = lowrank
        return derivative

    def accept(self, state: DBOState) -> Tuple[Optional[int], Optional[float]]:
        """Refresh the carry from the first stage and adapt p."""
        lowrank = self._stage_one
        if lowrank is None:
            return self.p, self.eps
        self._refresh(lowrank)
        used = self.p
        try:
            self.eps = error_indicator(lowrank.sigma_z)
        except RankControlError:
            self.eps = None
        if self.controller is not None and self.eps is not None and self.carry is not None:
            decision = adapt_rank(self.controller, self.eps, self.carry.YF)
            self.controller = decision.controller
            self.p = decision.controller.p
            self._plan = decision.columns
            self.rank_history.append((state.t, self.p, self.eps))
        logger.debug(
            "t=%.6g p=%d eps=%s prow=%s q=%s",
            state.t,
            used,
            "nan" if self.eps is None else f"{self.eps:.3e}",
            lowrank.prow.tolist(),
            lowrank.q.tolist(),
        )
        self._stage_one = None
        return used, self.eps
