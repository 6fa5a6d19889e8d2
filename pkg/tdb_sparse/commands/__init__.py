"""CLI commands for the tdb-sparse application."""
