"""Hyperbolic-type metrics, harmonic maps and quasiconformal distortion checks."""

__version__ = "0.1.0"
