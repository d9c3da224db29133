"""Polarization kernels: partial distances, code decompositions, LP bounds and SC simulation."""

__version__ = "0.1.0"
