"""Densities of imaginary quadratic fields satisfying Hypothesis choired for a fixed (E, p)."""

__version__ = "0.1.0"
