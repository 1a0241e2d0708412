"""Cubic-equation integrability checks for four-site R-matrices."""
__version__ = "0.1.0"
