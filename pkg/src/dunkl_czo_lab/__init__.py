"""Numerical laboratory for Dunkl Calderon-type commutators."""
__version__ = "0.1.0"
