"""Optimal control of Allen-Cahn phase-field systems on uniform grids."""

__version__ = "0.1.0"
