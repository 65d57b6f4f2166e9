"""Exact Koszulness checks for binary quadratic protoperads."""

__version__ = "0.1.0"
