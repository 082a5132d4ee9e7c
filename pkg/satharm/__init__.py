# File: satharm/__init__.py
"""Bessel-function harmonic model of I/Q saturation for radar echoes under strong interference."""

__version__ = "1.0.0"
