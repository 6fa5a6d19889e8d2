"""Sparse row/column index selection."""

from tdb_sparse.sampling.selectors import (
    EtaEstimate,
    Sampler,
    SelectionError,
    SelectionResult,
    deim_select,
    ldeim_select,
    qdeim_select,
    select,
    selection_eta,
)

__all__ = [
    "EtaEstimate",
    "Sampler",
    "SelectionError",
    "SelectionResult",
    "deim_select",
    "ldeim_select",
    "qdeim_select",
    "select",
    "selection_eta",
]
