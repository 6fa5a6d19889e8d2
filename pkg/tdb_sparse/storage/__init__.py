"""Storage layer: configuration files and run outputs."""

from tdb_sparse.storage.config_loader import ConfigError, ConfigLoader
from tdb_sparse.storage.output_writer import (
    OutputWriter,
    StorageError,
    format_float,
    read_snapshot,
)

__all__ = [
    "ConfigError",
    "ConfigLoader",
    "OutputWriter",
    "StorageError",
    "format_float",
    "read_snapshot",
]
