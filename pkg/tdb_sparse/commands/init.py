"""Write a default configuration file."""

from pathlib import Path

import typer

from tdb_sparse.display.formatter import DisplayFormatter
from tdb_sparse.errors import TDBError
from tdb_sparse.models.config import ModelKind, RunConfig
from tdb_sparse.storage import ConfigLoader


def init_config(
    config_path: Path = typer.Argument(..., help="Destination TOML file"),
    model: ModelKind = typer.Option(ModelKind.BURGERS, "--model", "-m", help="Physics model"),
    force: bool = typer.Option(False, "--force", "-f", help="Overwrite an existing file"),
) -> None:
    """
    Create a configuration file with default settings.

    Examples:
        tdb-sparse init burgers.toml
        tdb-sparse init ns.toml --model ns2d
    """
    formatter = DisplayFormatter()

    if config_path.exists() and not force:
        formatter.print_error(f"{config_path} already exists (use --force to overwrite)")
        raise typer.Exit(1)

    try:
        ConfigLoader(config_path).save(RunConfig(model=model))
    except TDBError as e:
        formatter.print_error(str(e))
        raise typer.Exit(1)

    formatter.print_success(f"Wrote default {model.value} configuration: {config_path}")
