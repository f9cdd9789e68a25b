"""Germ framework for scalar conservation laws with a flux discontinuity at x = 0."""

__version__ = "0.1.0"
