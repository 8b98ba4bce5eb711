"""Numerical workbench for Toeplitz and tilted Toeplitz minors, their Fredholm
determinant representations, symmetric function reductions, time flows and
the spiked soft-edge limit."""

__version__ = "0.1.0"
