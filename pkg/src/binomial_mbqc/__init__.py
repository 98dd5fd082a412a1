"""Cavity-QED toolkit for measurement-based computation with optical binomial codes."""

__version__ = "0.1.0"
