"""Exact and asymptotic correlations of axis defects in Aztec diamonds."""

__version__ = "1.0.0"
