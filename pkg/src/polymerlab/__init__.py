"""Numerical laboratory for random Schroedinger operators on hexagonal lattices and directed polymers."""

__version__ = "0.1.0"
