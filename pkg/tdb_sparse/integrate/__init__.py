"""Explicit time integration of full ensembles and DBO triplets."""

from tdb_sparse.integrate.providers import DecompressedProvider, SparseProvider
from tdb_sparse.integrate.rk4 import (
    BLOWUP_LIMIT,
    BlowUpError,
    RHSProvider,
    check_finite,
    fold_constraints,
    rk4_dbo,
    rk4_fom,
)

__all__ = [
    "BLOWUP_LIMIT",
    "BlowUpError",
    "DecompressedProvider",
    "RHSProvider",
    "SparseProvider",
    "check_finite",
    "fold_constraints",
    "rk4_dbo",
    "rk4_fom",
]
