# File: satharm/errors.py
from typing import Optional


class SatHarmError(Exception):
    """Base class for every error raised by the satharm package."""


class InvalidParameterError(SatHarmError, ValueError):
    """A parameter is outside the domain an operation accepts."""


class ParityError(InvalidParameterError):
    """Harmonic orders with even m + n are identically absent from the model."""

    def __init__(self, m: int, n: int):
        super().__init__(f"m + n must be odd, got (m={m}, n={n}); the term is analytically zero")
        self.m = m
        self.n = n


class ShapeMismatchError(SatHarmError, ValueError):
    """Two signals or phase series do not share a sample grid."""


class CapabilityError(SatHarmError):
    """The requested model cannot produce the requested harmonic."""


class SignalFormatError(SatHarmError):
    """A signal or TF-map file is malformed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ConvergenceError(SatHarmError):
    """Quadrature did not reach its tolerance within the allowed number of panels."""

    def __init__(self, message: str, value: float, estimate: float):
        super().__init__(f"{message}: value={value!r}, error estimate={estimate:.3e}")
        self.value = value
        self.estimate = estimate


class ConfigError(SatHarmError):
    """A scenario configuration is invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class VerificationError(SatHarmError):
    """One or more verification checks failed."""
