"""Command-line front end."""

from .main import main, run, build_parser

__all__ = ["main", "run", "build_parser"]
