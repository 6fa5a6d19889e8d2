"""Validate configuration command."""

from pathlib import Path

import typer

from tdb_sparse.commands.common import CONFIG_EXIT_CODE, load_run_config
from tdb_sparse.display.formatter import DisplayFormatter
from tdb_sparse.storage import ConfigError
from tdb_sparse.utils import estimate_peak_bytes, stable_dt


def validate_file(
    config_path: Path = typer.Argument(..., help="Experiment TOML file"),
    bench: bool = typer.Option(False, "--bench", help="Also apply the benchmark checks"),
) -> None:
    """
    Check a configuration file and show the resolved settings.

    Examples:
        tdb-sparse validate burgers.toml
        tdb-sparse validate bench_n.toml --bench
    """
    formatter = DisplayFormatter()

    try:
        cfg = load_run_config(config_path, bench=bench)
    except ConfigError as e:
        formatter.print_error(str(e))
        raise typer.Exit(CONFIG_EXIT_CODE)

    formatter.print_config_table(cfg.to_dict(), title=str(config_path))
    formatter.print_info(f"Stable dt estimate: {stable_dt(cfg):.3e} (configured {cfg.dt:.3e})")
    formatter.print_info(f"Estimated peak memory: {estimate_peak_bytes(cfg) / 1024**2:.1f} MiB")
    formatter.print_success("Configuration is valid")
