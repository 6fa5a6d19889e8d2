"""Classical fourth-order Runge-Kutta for the full ensemble and for the DBO triplet."""

import time
from typing import TYPE_CHECKING, Optional, Protocol, Tuple

import numpy as np

from tdb_sparse.errors import TDBError
from tdb_sparse.linalg import reorthonormalize
from tdb_sparse.models.records import SolverKind, StepReport
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights

if TYPE_CHECKING:
    from tdb_sparse.physics.base import Model

BLOWUP_LIMIT = 1e12

RK4_NODES = (0.0, 0.5, 0.5, 1.0)
RK4_WEIGHTS = (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)


class BlowUpError(TDBError):
    """Non-finite or exploding values during time integration."""

    def __init__(self, message: str, t: float, column: Optional[int] = None) -> None:
        super().__init__(message)
        self.t = t
        self.column = column


def check_finite(M: np.ndarray, t: float, what: str) -> None:
    """
    Reject NaN, Inf or entries above the blow-up limit.

    Raises:
        BlowUpError: Naming the time and the first offending column.
    """
    bad = ~np.isfinite(M) | (np.abs(M) > BLOWUP_LIMIT)
    if np.any(bad):
        column = int(np.argwhere(bad)[0][-1]) if M.ndim == 2 else None
        raise BlowUpError(f"{what} blew up at t={t:.6g} (column {column})", t=t, column=column)


def rk4_fom(model: "Model", V: np.ndarray, t: float, dt: float) -> np.ndarray:
    """
    One RK4 step of dV/dt = F(V, t) for every sample column.

    Args:
        model: Physics model.
        V: Ensemble n×s at time t.
        t: Current time.
        dt: Step size (> 0).

    Returns:
        Ensemble at t + dt.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = model.rhs_columns(V, t)
    check_finite(k1, t, "FOM stage 1")
    k2 = model.rhs_columns(V + 0.5 * dt * k1, t + 0.5 * dt)
    check_finite(k2, t, "FOM stage 2")
    k3 = model.rhs_columns(V + 0.5 * dt * k2, t + 0.5 * dt)
    check_finite(k3, t, "FOM stage 3")
    k4 = model.rhs_columns(V + dt * k3, t + dt)
    check_finite(k4, t, "FOM stage 4")
    V_next = V + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    check_finite(V_next, t + dt, "FOM state")
    return V_next


class RHSProvider(Protocol):
    """Source of DBO derivatives for the stages of one step."""

    kind: SolverKind
    weights: QuadratureWeights

    def derivative(self, state: DBOState, stage: int) -> DBODerivative: ...

    def accept(self, state: DBOState) -> Tuple[Optional[int], Optional[float]]:
        """Hook run after an accepted step; returns (p, eps) for the step report."""
        ...


def fold_constraints(state: DBOState, weights: QuadratureWeights) -> DBOState:
    """
    Restore orthonormality of U and Y and fold the factors into Σ.

    U = U' T_U and Y = Y' T_Y give U Σ Yᵀ = U' (T_U Σ T_Yᵀ) Y'ᵀ.
    """
    U, T_U = reorthonormalize(state.U, weights.wx)
    Y, T_Y = reorthonormalize(state.Y, weights.wxi)
    return DBOState(U=U, Sigma=T_U @ state.Sigma @ T_Y.T, Y=Y, t=state.t)


def rk4_dbo(provider: RHSProvider, state: DBOState, dt: float) -> Tuple[DBOState, StepReport]:
    """
    One RK4 step of the DBO triplet followed by constraint restoration.

    Args:
        provider: Decompressed or sparse RHS provider.
        state: State at the start of the step.
        dt: Step size (> 0).

    Returns:
        (state at t + dt, StepReport).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    start = time.perf_counter_ns()
    stages = []
    for i, node in enumerate(RK4_NODES):
        stage_state = state if i == 0 else state.advance(stages[-1], node * dt)
        k = provider.derivative(stage_state, i)
        for block in (k.dU, k.dSigma, k.dY):
            check_finite(block, stage_state.t, f"DBO stage {i + 1}")
        stages.append(k)
    increment = stages[0].combine(stages[1:], RK4_WEIGHTS)
    advanced = state.advance(increment, dt)
    for block in (advanced.U, advanced.Sigma, advanced.Y):
        check_finite(block, advanced.t, "DBO state")
    new_state = fold_constraints(advanced, provider.weights)
    p, eps = provider.accept(new_state)
    wall_ns = max(1, time.perf_counter_ns() - start)
    report = StepReport(t=new_state.t, dt=dt, mode=provider.kind, wall_ns=wall_ns, p=p, eps=eps)
    return new_state, report
