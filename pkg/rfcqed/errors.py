"""
Exception hierarchy for rfcqed.
Library code raises these; the CLI maps them onto exit codes.
"""
from typing import Optional


class RfcqedError(Exception):
    """Base class for all rfcqed errors."""


class ParameterError(RfcqedError, ValueError):
    """Invalid physical or numerical input."""


class BasisMismatchError(ParameterError):
    """Operators built on different basis descriptors were combined."""


class NumericalError(RfcqedError, RuntimeError):
    """A numerical procedure failed its own accuracy or sanity check."""


class ConfigError(RfcqedError):
    """Malformed experiment configuration."""

    def __init__(self, message: str, key_path: Optional[str] = None):
        self.key_path = key_path
        if key_path:
            message = f"{key_path}: {message}"
        super().__init__(message)


class ValidationFailure(RfcqedError):
    """One or more acceptance checks failed."""
