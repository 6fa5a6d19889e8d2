"""Utility functions for the tdb-sparse CLI."""

from tdb_sparse.utils.validators import (
    MEMORY_LIMIT_BYTES,
    error_fields,
    estimate_peak_bytes,
    stable_dt,
    validate_bench,
    validate_config,
    validate_sampler,
    validate_threads,
)

__all__ = [
    "MEMORY_LIMIT_BYTES",
    "error_fields",
    "estimate_peak_bytes",
    "stable_dt",
    "validate_bench",
    "validate_config",
    "validate_sampler",
    "validate_threads",
]
