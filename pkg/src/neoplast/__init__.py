"""Symbolic analysis of geometric-abstract compositions."""
__version__ = "0.1.0"
