"""Console display for the tdb-sparse CLI."""

from tdb_sparse.display.formatter import DisplayFormatter

__all__ = ["DisplayFormatter"]
