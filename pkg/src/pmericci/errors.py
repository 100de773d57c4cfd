"""Exception hierarchy.

Every error carries an exit code so the command-line runner can map a
failure to the documented process status without inspecting messages.
"""
from __future__ import annotations


class PmeError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class UsageError(PmeError, ValueError):
    """Bad arguments, malformed configuration or input files."""

    exit_code = 2


class DomainError(PmeError, ValueError):
    """An argument lies outside the domain of the requested function."""

    exit_code = 2


class GeometryError(PmeError, ValueError):
    """A geometric request cannot be honoured on the selected model."""

    exit_code = 2


class AdmissibilityError(PmeError):
    """A coefficient triple violates the conditions required by an estimate."""

    exit_code = 1

    def __init__(self, message: str, violated: list[str] | None = None):
        super().__init__(message)
        self.violated = list(violated or [])


class NumericalError(PmeError):
    """Base for failures of the time integrator."""

    exit_code = 3


class ExtinctionError(NumericalError):
    """The shrinking sphere has reached (or passed) its extinction time."""


class PositivityLossError(NumericalError):
    """A step produced a non-positive pressure value."""


class InstabilityError(NumericalError):
    """Non-finite values appeared during integration."""


class OracleGateError(PmeError):
    """An oracle failed its own self-validation and must not be consulted."""

    exit_code = 3
