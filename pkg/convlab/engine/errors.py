"""
Lab Errors

Exception hierarchy shared by the engines and services.
"""

from typing import List, Optional


class LabError(Exception):
    """Base class for every error raised by convlab."""


class WindowMismatchError(LabError):
    """Data does not fit the window it is used in."""


class NotPolyhedralError(LabError):
    """A linear-programming path was requested for Euclidean data."""


class UnboundedProgramError(LabError):
    """A linear program that should be bounded is not."""


class InfeasibleProgramError(LabError):
    """A linear program that should be feasible is not."""


class SeparationError(LabError):
    """The two sets are not strictly separated (gap is zero or undefined)."""


class PreconditionError(LabError):
    """An operation precondition failed; the message names the inequality."""


class CertificateError(LabError):
    """A certificate violates its own invariants."""


class ConsistencyError(LabError):
    """Two computations that must agree did not."""


class ScenarioConfigError(LabError):
    """A scenario or probe configuration failed validation."""

    def __init__(self, message: str, paths: Optional[List[str]] = None):
        super().__init__(message)
        self.paths: List[str] = paths or []
