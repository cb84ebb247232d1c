"""Numerical verification of biharmonic-map formulas on doubly warped products."""

__version__ = "0.1.0"
