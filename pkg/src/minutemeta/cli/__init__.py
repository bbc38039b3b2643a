"""CLI package."""

from minutemeta.cli.main import cli
from minutemeta.cli.recipe import Recipe

__all__ = ["Recipe", "cli"]
