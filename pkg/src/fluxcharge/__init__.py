"""Flux-charge symmetric analysis of superconducting LC circuits."""

__version__ = "0.1.0"
