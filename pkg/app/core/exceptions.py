"""
Exception hierarchy for the Wasserstein Rigidity Lab.
"""
from typing import Any


class WassersteinLabError(Exception):
    """Base class for every error raised by the lab."""


class SpaceError(WassersteinLabError, ValueError):
    """Invalid space descriptor, foreign point, or out-of-range coordinate."""


class MeasureError(WassersteinLabError, ValueError):
    """Invalid weights, empty restriction, or unsupported measure shape."""


class TransportError(WassersteinLabError, ValueError):
    """Mismatched spaces, invalid exponents, or a plan with wrong marginals."""


class NotComputableError(WassersteinLabError):
    """The requested geodesic structure is outside the supported configurations."""


class SolverError(WassersteinLabError, RuntimeError):
    """The transportation solver did not reach an optimal basis."""


class ConstructionError(WassersteinLabError, ValueError):
    """A precondition of a rigidity construction does not hold."""


class UniqueMidpointError(ConstructionError):
    """
    Raised when a second midpoint is requested but the midpoint is unique.

    The unique midpoint is attached so callers can still inspect it.
    """

    def __init__(self, message: str, midpoint: Any):
        super().__init__(message)
        self.midpoint = midpoint


class UnknownSuiteError(WassersteinLabError, KeyError):
    """No verification suite is registered under the requested name."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown suite"
