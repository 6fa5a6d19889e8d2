"""Weighted dense linear algebra kernels."""

from tdb_sparse.linalg.factorizations import (
    LinalgError,
    RankDeficiencyError,
    fix_signs,
    jacobi_svd,
    lu_solve_checked,
    pivoted_qr,
    singular_values_small,
    sym_eig,
)
from tdb_sparse.linalg.weighted import (
    numerical_rank,
    reorthonormalize,
    truncated_svd_weighted,
    weighted_frobenius,
    weighted_inner,
)

__all__ = [
    "LinalgError",
    "RankDeficiencyError",
    "fix_signs",
    "jacobi_svd",
    "lu_solve_checked",
    "numerical_rank",
    "pivoted_qr",
    "reorthonormalize",
    "singular_values_small",
    "sym_eig",
    "truncated_svd_weighted",
    "weighted_frobenius",
    "weighted_inner",
]
