"""Configuration loading shared by the commands."""

import dataclasses
from pathlib import Path
from typing import Any, Dict, Optional

from tdb_sparse.models.config import RunConfig
from tdb_sparse.storage import ConfigError, ConfigLoader
from tdb_sparse.utils import error_fields, validate_bench, validate_config, validate_threads

# exit code for unreadable or invalid configuration files
CONFIG_EXIT_CODE = 2


def load_run_config(
    config_path: Path,
    seed: Optional[int] = None,
    output_dir: Optional[Path] = None,
    threads: Optional[int] = None,
    bench: bool = False,
) -> RunConfig:
    """
    Load a configuration file, apply command-line overrides and validate the result.

    Args:
        config_path: TOML file.
        seed: Overrides [run] seed.
        output_dir: Overrides [run] output_dir.
        threads: Overrides [run] threads.
        bench: Also apply the benchmark checks.

    Returns:
        The validated RunConfig.

    Raises:
        ConfigError: Listing every offending field.
    """
    cfg = ConfigLoader(config_path).load()
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["seed"] = seed
    if output_dir is not None:
        overrides["output_dir"] = output_dir
    if threads is not None:
        overrides["threads"] = validate_threads(threads)
    cfg = dataclasses.replace(cfg, **overrides)

    errors = validate_config(cfg)
    if bench:
        errors += validate_bench(cfg)
    if errors:
        raise ConfigError(
            "Invalid configuration:\n  " + "\n  ".join(errors), fields=error_fields(errors)
        )
    return cfg
