"""Exact and Monte Carlo cumulants of traces of random matrix polynomials."""

__version__ = "0.1.0"
