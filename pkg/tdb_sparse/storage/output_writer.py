"""Output files with atomic writes: CSV tables, JSON manifests and raw snapshots."""

import csv
import io
import json
import logging
from pathlib import Path
from tempfile import NamedTemporaryFile
from typing import Any, Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from tdb_sparse.errors import TDBError

logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"

Cell = Union[int, float, str, None]


class StorageError(TDBError):
    """Output file errors; the message names the path."""

    pass


def format_float(value: float) -> str:
    """Round-trip exact text for a float (17 significant digits)."""
    return format(float(value), ".17g")


def _cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


class OutputWriter:
    """
    Writes the files of one run directory.

    Every file is written to a temporary sibling and moved into place, so readers never
    see a partial file.
    """

    def __init__(self, output_dir: Path) -> None:
        """
        Initialize output writer.

        Args:
            output_dir: Directory receiving the files; created if missing.
        """
        self.output_dir: Path = output_dir
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Failed to create output directory {output_dir}: {e}")

    def _atomic_write(self, name: str, payload: Union[str, bytes]) -> Path:
        path = self.output_dir / name
        binary = isinstance(payload, bytes)
        try:
            with NamedTemporaryFile(
                mode="wb" if binary else "w",
                encoding=None if binary else "utf-8",
                newline=None if binary else "",
                dir=self.output_dir,
                delete=False,
                prefix=f"{name}.",
                suffix=".tmp",
            ) as tmp_file:
                tmp_file.write(payload)
                tmp_path = Path(tmp_file.name)

            tmp_path.replace(path)
        except OSError as e:
            raise StorageError(f"Failed to write {path}: {e}")
        logger.debug("wrote %s", path)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> Path:
        """
        Write a CSV table with a header row.

        Floats are written with 17 significant digits; None becomes an empty cell.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        return self._atomic_write(name, buffer.getvalue())

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        """Write a JSON document."""
        return self._atomic_write(name, json.dumps(data, indent=2, ensure_ascii=False) + "\n")

    def write_snapshot(self, name: str, array: np.ndarray, t: float) -> Path:
        """
        Write a matrix as raw little-endian float64 bytes plus a JSON sidecar.

        The sidecar `<name>.json` records dims, dtype, order and t.
        """
        array = np.ascontiguousarray(array, dtype=SNAPSHOT_DTYPE)
        path = self._atomic_write(f"{name}.bin", array.tobytes(order="C"))
        self.write_json(
            f"{name}.json",
            {"dims": list(array.shape), "dtype": SNAPSHOT_DTYPE, "order": "C", "t": t},
        )
        return path


def read_snapshot(path: Path) -> Tuple[np.ndarray, float]:
    """
    Read a raw snapshot written by OutputWriter.write_snapshot.

    Args:
        path: Path of the `.bin` file.

    Returns:
        (array, t).
    """
    sidecar = path.with_suffix(".json")
    try:
        with open(sidecar, "r", encoding="utf-8") as f:
            meta = json.load(f)
        data = np.fromfile(path, dtype=meta["dtype"])
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise StorageError(f"Failed to read snapshot {path}: {e}")
    return data.reshape(meta["dims"]), float(meta["t"])
