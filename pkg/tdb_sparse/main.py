"""Main CLI entry point for tdb-sparse."""

import logging

import typer
from rich.console import Console
from rich.logging import RichHandler

from tdb_sparse.commands.bench import bench_scaling
from tdb_sparse.commands.init import init_config
from tdb_sparse.commands.run import run_experiment
from tdb_sparse.commands.validate import validate_file
from tdb_sparse.display import DisplayFormatter

# Create main Typer app
app = typer.Typer(
    name="tdb-sparse",
    help="Sparse time-dependent-basis reduced-order models for stochastic PDEs",
    no_args_is_help=True,
    add_completion=False,
)


def configure_logging(verbose: bool, color: bool = True) -> None:
    """Attach a single Rich handler to the package logger."""
    logger = logging.getLogger("tdb_sparse")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    console = Console() if color else Console(no_color=True)
    handler = RichHandler(console=console, show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


@app.callback()
def main_options(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log every step"),
    no_color: bool = typer.Option(False, "--no-color", help="Plain output without colors"),
) -> None:
    """Sparse TDB-ROM experiments: run, bench, validate, init."""
    DisplayFormatter.color_enabled = not no_color
    configure_logging(verbose, color=not no_color)


app.command(name="run")(run_experiment)
app.command(name="bench")(bench_scaling)
app.command(name="validate")(validate_file)
app.command(name="check")(validate_file)  # Alias
app.command(name="init")(init_config)


def main() -> None:
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
