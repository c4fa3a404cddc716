"""Pseudo-spectral laboratory for inviscid alpha-models of turbulence on the 3-torus."""

__version__ = "0.1.0"
