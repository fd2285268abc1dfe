"""Executable taxonomy of locality-respecting quantum channels on qudit lattices."""

__version__ = "0.1.0"
