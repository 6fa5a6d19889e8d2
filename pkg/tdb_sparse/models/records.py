"""Per-step reports and per-output metric records."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np


class SolverKind(str, Enum):
    """Solver that produced a record."""

    FOM = "FOM"
    TDB = "TDB"
    STDB = "STDB"


@dataclass(frozen=True)
class StepReport:
    """
    Outcome of one accepted time step.

    Attributes:
        t: Time after the step.
        dt: Step size.
        mode: Solver kind.
        wall_ns: Elapsed wall-clock nanoseconds.
        p: Interpolation rank used (sparse solver only).
        eps: Error indicator after the step (sparse solver only).
    """

    t: float
    dt: float
    mode: SolverKind
    wall_ns: int
    p: Optional[int] = None
    eps: Optional[float] = None


@dataclass
class MetricRecord:
    """
    Metrics of one solver at one output time.

    Attributes:
        t: Output time.
        total_error: Weighted Frobenius distance to the full-order ensemble (NaN if absent).
        singular_values: Singular values, descending.
        p: Interpolation rank (sparse solver only).
        eps: Error indicator (sparse solver only).
        wall_ns: Wall-clock time of the step that reached t.
        selected_rows: Row indices of the last interpolation.
        selected_cols: Column indices of the last interpolation.
    """

    t: float
    total_error: float = float("nan")
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    p: Optional[int] = None
    eps: Optional[float] = None
    wall_ns: int = 0
    selected_rows: List[int] = field(default_factory=list)
    selected_cols: List[int] = field(default_factory=list)
