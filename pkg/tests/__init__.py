"""Tests for the To-Do CLI application."""
