"""Experiment driver: solver orchestration, metric files and the scaling benchmark."""

from tdb_sparse.driver.bench import BenchPoint, BenchResult, scaling_bench
from tdb_sparse.driver.experiment import (
    Experiment,
    RunResult,
    SolverRun,
    build_model,
    ensemble_checksum,
    initial_ensemble,
    output_steps,
    prepare,
    run,
)
from tdb_sparse.driver.metrics import METRIC_HEADER, emit_metrics

__all__ = [
    "BenchPoint",
    "BenchResult",
    "Experiment",
    "METRIC_HEADER",
    "RunResult",
    "SolverRun",
    "build_model",
    "emit_metrics",
    "ensemble_checksum",
    "initial_ensemble",
    "output_steps",
    "prepare",
    "run",
    "scaling_bench",
]
