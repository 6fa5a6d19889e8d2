"""Config loader for TOML experiment files."""

from dataclasses import MISSING, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import tomli
import tomli_w

from tdb_sparse.errors import TDBError
from tdb_sparse.models.config import RUN_KEYS, SECTION_TYPES, RunConfig, section_keys


class ConfigError(TDBError):
    """Configuration-related errors; `fields` lists every offending key."""

    def __init__(self, message: str, fields: Optional[List[str]] = None) -> None:
        super().__init__(message)
        self.fields: List[str] = list(fields or [])


def _expected_types() -> Dict[str, Dict[str, type]]:
    """Scalar type of every key, taken from the dataclass defaults."""
    defaults = RunConfig()
    types: Dict[str, Dict[str, type]] = {"run": {}}
    for key in RUN_KEYS:
        value = getattr(defaults, key)
        types["run"][key] = type(value.value) if hasattr(value, "value") else type(value)
    for section, cls in SECTION_TYPES.items():
        types[section] = {}
        for f in fields(cls):
            if f.default is not MISSING:
                types[section][f.name] = type(f.default)
            elif f.default_factory is not MISSING:
                types[section][f.name] = type(f.default_factory())
    return types


def _type_ok(value: Any, expected: type) -> bool:
    if expected is bool:
        return isinstance(value, bool)
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if issubclass(expected, Path):
        return isinstance(value, str)
    return isinstance(value, expected)


class ConfigLoader:
    """Strict loading and saving of run configurations."""

    def __init__(self, config_path: Path) -> None:
        """
        Initialize config loader.

        Args:
            config_path: Path to the TOML file.
        """
        self.config_path: Path = config_path

    def check(self, data: Dict[str, Any]) -> List[str]:
        """
        Offending section and key names of a parsed file, in file order.

        Unknown sections, unknown keys and values of the wrong type are all reported.
        """
        problems: List[str] = []
        types = _expected_types()
        for section, body in data.items():
            if section not in types:
                problems.append(section)
                continue
            if not isinstance(body, dict):
                problems.append(section)
                continue
            allowed = section_keys(section)
            for key, value in body.items():
                if key not in allowed or not _type_ok(value, types[section][key]):
                    problems.append(f"{section}.{key}")
        return problems

    def load(self) -> RunConfig:
        """
        Load configuration from file.

        Returns:
            RunConfig with loaded settings.

        Raises:
            ConfigError: If the file is missing, unreadable or has unknown or mistyped keys.
        """
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}")

        try:
            with open(self.config_path, "rb") as f:
                data = tomli.load(f)
        except (OSError, tomli.TOMLDecodeError) as e:
            raise ConfigError(f"Failed to load config {self.config_path}: {e}")

        problems = self.check(data)
        if problems:
            raise ConfigError(
                f"Unknown or mistyped config entries: {', '.join(problems)}", fields=problems
            )

        try:
            return RunConfig.from_dict(data)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config {self.config_path}: {e}")

    def save(self, config: RunConfig) -> None:
        """
        Save configuration to file.

        Args:
            config: RunConfig to save.
        """
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, "wb") as f:
                tomli_w.dump(config.to_dict(), f)
        except OSError as e:
            raise ConfigError(f"Failed to save config {self.config_path}: {e}")
