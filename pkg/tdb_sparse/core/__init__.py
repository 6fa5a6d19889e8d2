"""DBO state evolution and reference diagnostics."""

from tdb_sparse.core.dbo import (
    SingularSigmaError,
    check_sigma,
    dbo_rhs_decompressed,
    ensemble_moments,
    ensemble_singular_values,
    init_from_samples,
    low_rank_distance,
    mean_and_variance,
    orthonormality_defect,
    reduced_linear_matrix,
    singular_values,
    times_sigma_inv,
    times_sigma_inv_t,
    total_error,
)

__all__ = [
    "SingularSigmaError",
    "check_sigma",
    "dbo_rhs_decompressed",
    "ensemble_moments",
    "ensemble_singular_values",
    "init_from_samples",
    "low_rank_distance",
    "mean_and_variance",
    "orthonormality_defect",
    "reduced_linear_matrix",
    "singular_values",
    "times_sigma_inv",
    "times_sigma_inv_t",
    "total_error",
]
