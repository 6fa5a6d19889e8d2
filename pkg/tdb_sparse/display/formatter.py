"""Display formatter with Rich library for colorized output."""

import sys
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from tdb_sparse.storage.output_writer import format_float


class DisplayFormatter:
    """
    Formats run summaries, timing tables and messages using Rich library.
    """

    SOLVER_COLORS = {
        "FOM": "cyan",
        "TDB": "yellow",
        "STDB": "green",
    }

    # Use ASCII-safe characters on Windows to avoid encoding issues
    if sys.platform == "win32":
        SUCCESS_ICON = "[OK]"
        ERROR_ICON = "[X]"
        WARNING_ICON = "[!]"
        INFO_ICON = "[i]"
    else:
        SUCCESS_ICON = "✓"
        ERROR_ICON = "✗"
        WARNING_ICON = "⚠"
        INFO_ICON = "ℹ"

    # set once per process by the --no-color option
    color_enabled = True

    def __init__(self, color_enabled: Optional[bool] = None) -> None:
        """
        Initialize formatter.

        Args:
            color_enabled: Whether to colorize output; defaults to the process-wide setting.
        """
        if color_enabled is None:
            color_enabled = DisplayFormatter.color_enabled
        self.console = Console() if color_enabled else Console(no_color=True)

    def print_config_table(self, data: Dict[str, Dict[str, Any]], title: str = "Config") -> None:
        """
        Display a resolved configuration, one row per key.

        Args:
            data: Nested sections as produced by RunConfig.to_dict.
            title: Table title.
        """
        table = Table(title=title, show_header=True, header_style="bold magenta")
        table.add_column("Section", style="cyan")
        table.add_column("Key", style="bold white")
        table.add_column("Value")
        for section, body in data.items():
            for key, value in body.items():
                table.add_row(section, key, str(value))
        self.console.print(table)

    def print_timing_table(
        self, header: Sequence[str], rows: Sequence[Sequence[Any]], title: str = "Timing"
    ) -> None:
        """
        Display a timing table.

        Args:
            header: Column names.
            rows: Table rows; floats are shown with 4 significant digits.
            title: Table title.
        """
        if not rows:
            self.print_info("No timings recorded.")
            return

        table = Table(title=title, show_header=True, header_style="bold magenta")
        for name in header:
            table.add_column(name, justify="right")
        for row in rows:
            table.add_row(*[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row])
        self.console.print(table)

    def print_run_summary(self, final_errors: Dict[str, float], wall_s: Dict[str, float]) -> None:
        """
        Print final errors and wall times per solver.

        Args:
            final_errors: Total error at the final time, by solver name.
            wall_s: Wall-clock seconds, by solver name.
        """
        parts: List[str] = []
        for name, seconds in wall_s.items():
            color = self.SOLVER_COLORS.get(name, "white")
            error = final_errors.get(name)
            error_str = "" if error is None else f" E={format_float(error)[:10]}"
            parts.append(f"[{color}]{name}{error_str} ({seconds:.2f} s)[/{color}]")
        self.console.print(f"\n[bold]Summary:[/bold] " + " | ".join(parts))

    def print_success(self, message: str) -> None:
        """Print success message in green."""
        self.console.print(f"[bold green]{self.SUCCESS_ICON} {message}[/bold green]")

    def print_error(self, message: str) -> None:
        """Print error message in red."""
        self.console.print(f"[bold red]{self.ERROR_ICON} {message}[/bold red]")

    def print_warning(self, message: str) -> None:
        """Print warning message in yellow."""
        self.console.print(f"[bold yellow]{self.WARNING_ICON} {message}[/bold yellow]")

    def print_info(self, message: str) -> None:
        """Print info message in blue."""
        self.console.print(f"[bold blue]{self.INFO_ICON} {message}[/bold blue]")
