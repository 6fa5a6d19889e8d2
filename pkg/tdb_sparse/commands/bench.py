"""Scaling benchmark command."""

from pathlib import Path
from typing import Optional

import typer

from tdb_sparse.commands.common import CONFIG_EXIT_CODE, load_run_config
from tdb_sparse.display.formatter import DisplayFormatter
from tdb_sparse.driver.bench import scaling_bench
from tdb_sparse.errors import TDBError
from tdb_sparse.storage import ConfigError


def bench_scaling(
    config_path: Path = typer.Argument(..., help="Experiment TOML file with a [bench] section"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the random seed"),
    output_dir: Optional[Path] = typer.Option(
        None, "--output-dir", "-o", help="Override the output directory"
    ),
    threads: Optional[int] = typer.Option(
        None, "--threads", "-j", envvar="TDB_SPARSE_THREADS", help="Worker threads for the RHS"
    ),
) -> None:
    """
    Time TDB and S-TDB steps on Burgers over a sweep of n or s.

    Examples:
        tdb-sparse bench bench_n.toml
    """
    formatter = DisplayFormatter()

    try:
        cfg = load_run_config(
            config_path, seed=seed, output_dir=output_dir, threads=threads, bench=True
        )
    except ConfigError as e:
        formatter.print_error(str(e))
        raise typer.Exit(CONFIG_EXIT_CODE)

    try:
        result = scaling_bench(cfg)
    except TDBError as e:
        formatter.print_error(f"Benchmark failed: {e}")
        raise typer.Exit(1)

    formatter.print_timing_table(
        result.header, [pt.row() for pt in result.points], title=f"Scaling over {result.sweep}"
    )
    for solver, slope in result.exponents.items():
        formatter.print_info(f"{solver} growth exponent in {result.sweep}: {slope:.3f}")
    if result.path is not None:
        formatter.print_success(f"Wrote {result.path}")
