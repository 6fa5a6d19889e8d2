"""Per-output metric records as CSV."""

from pathlib import Path
from typing import List, Sequence

from tdb_sparse.models.records import MetricRecord
from tdb_sparse.storage import OutputWriter, format_float

METRIC_HEADER = [
    "t",
    "total_error",
    "p",
    "eps",
    "wall_ns",
    "singular_values",
    "selected_rows",
    "selected_cols",
]


def _record_row(record: MetricRecord) -> List[object]:
    return [
        record.t,
        record.total_error,
        record.p,
        record.eps,
        record.wall_ns,
        " ".join(format_float(v) for v in record.singular_values),
        " ".join(str(int(i)) for i in record.selected_rows),
        " ".join(str(int(i)) for i in record.selected_cols),
    ]


def emit_metrics(records: Sequence[MetricRecord], path: Path) -> Path:
    """
    Write metric records, one row per output time.

    Floats carry 17 significant digits so the file parses back to the same values.
    Singular values and index sets are space-separated inside a single cell; an
    empty record list yields a header-only file.

    Args:
        records: Records in output order.
        path: Destination CSV file.

    Returns:
        The written path.
    """
    writer = OutputWriter(path.parent)
    return writer.write_csv(path.name, METRIC_HEADER, (_record_row(r) for r in records))
