"""Command-line entry point for tree semantic loss experiments."""

__version__ = "0.1.0"
