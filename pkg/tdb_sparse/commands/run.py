"""Run experiment command."""

import math
from pathlib import Path
from typing import Dict, List, Optional

import typer

from tdb_sparse.commands.common import CONFIG_EXIT_CODE, load_run_config
from tdb_sparse.display.formatter import DisplayFormatter
from tdb_sparse.driver import run
from tdb_sparse.errors import TDBError
from tdb_sparse.models.records import SolverKind
from tdb_sparse.storage import ConfigError


def run_experiment(
    config_path: Path = typer.Argument(..., help="Experiment TOML file"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the random seed"),
    output_dir: Optional[Path] = typer.Option(
        None, "--output-dir", "-o", help="Override the output directory"
    ),
    threads: Optional[int] = typer.Option(
        None, "--threads", "-j", envvar="TDB_SPARSE_THREADS", help="Worker threads for the RHS"
    ),
) -> None:
    """
    Run FOM, TDB, S-TDB or all three and write the output files.

    Examples:
        tdb-sparse run burgers.toml
        tdb-sparse run burgers.toml --seed 7 --output-dir runs/seed7
        tdb-sparse run ns.toml --threads 8
    """
    formatter = DisplayFormatter()

    try:
        cfg = load_run_config(config_path, seed=seed, output_dir=output_dir, threads=threads)
    except ConfigError as e:
        formatter.print_error(str(e))
        raise typer.Exit(CONFIG_EXIT_CODE)

    formatter.print_info(
        f"Running {cfg.mode.value} on {cfg.model.value}: n={cfg.n}, s={cfg.s}, r={cfg.r}, "
        f"{cfg.steps} steps"
    )
    try:
        result = run(cfg)
    except TDBError as e:
        formatter.print_error(f"Run failed: {e}")
        raise typer.Exit(1)

    final_errors: Dict[str, float] = {}
    unreferenced: List[str] = []
    for solver_run in result.runs:
        if solver_run.kind == SolverKind.FOM or not solver_run.records:
            continue
        error = solver_run.records[-1].total_error
        if math.isnan(error):
            unreferenced.append(solver_run.label)
        else:
            final_errors[solver_run.label] = error
    if unreferenced:
        names = ", ".join(unreferenced)
        formatter.print_warning(f"No FOM reference for {names}; errors not computed")
    formatter.print_run_summary(final_errors, {r.label: r.wall_s for r in result.runs})
    formatter.print_success(f"Wrote {len(result.files)} files to {cfg.output_dir}")
