"""Data models for runs, states and metrics."""

from tdb_sparse.models.config import (
    AdaptiveConfig,
    BenchConfig,
    BurgersConfig,
    DiffusionConfig,
    Mode,
    ModelKind,
    NSConfig,
    RunConfig,
)
from tdb_sparse.models.records import MetricRecord, SolverKind, StepReport
from tdb_sparse.models.state import DBODerivative, DBOState, QuadratureWeights

__all__ = [
    "AdaptiveConfig",
    "BenchConfig",
    "BurgersConfig",
    "DBODerivative",
    "DBOState",
    "DiffusionConfig",
    "MetricRecord",
    "Mode",
    "ModelKind",
    "NSConfig",
    "QuadratureWeights",
    "RunConfig",
    "SolverKind",
    "StepReport",
]
