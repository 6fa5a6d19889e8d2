"""Sparse interpolation of the RHS matrix and adaptive interpolation rank."""

from tdb_sparse.sparse.diagnostics import CURDiagnostics, cur_diagnostics
from tdb_sparse.sparse.interp import (
    LowRankRHS,
    RHSBasisCarry,
    compressed_derivative,
    compute_UF,
    compute_YF,
    compute_ZF,
    select_columns,
    sparse_rhs,
)
from tdb_sparse.sparse.rank import (
    RankControlError,
    RankController,
    RankDecision,
    adapt_rank,
    error_indicator,
)

__all__ = [
    "CURDiagnostics",
    "LowRankRHS",
    "RHSBasisCarry",
    "RankControlError",
    "RankController",
    "RankDecision",
    "adapt_rank",
    "compressed_derivative",
    "compute_UF",
    "compute_YF",
    "compute_ZF",
    "cur_diagnostics",
    "error_indicator",
    "select_columns",
    "sparse_rhs",
]
