"""Integral geometry of chords in the hyperbolic plane."""

__version__ = "0.1.0"
