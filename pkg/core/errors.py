"""
Exception hierarchy for the lateral Casimir-Polder toolkit.

Every failure raised on purpose derives from LateralCPError so that scans and
the CLI can tell expected numerical or configuration problems from bugs.
"""

from typing import Optional


class LateralCPError(Exception):
    """Base class for all expected failures."""


class ConfigError(LateralCPError, ValueError):
    """Invalid settings, unknown keys, malformed units or record invariants."""


class SurfaceContactError(ConfigError):
    """The atom or condensate reaches the corrugated surface."""


class RangeError(LateralCPError, ValueError):
    """Evaluation point lies outside a tabulated domain."""


class DivergenceError(LateralCPError):
    """The requested quantity diverges for the given model."""


class SingularKinematicsError(LateralCPError):
    """A TM polarization vector is undefined at zero frequency."""


class CalibrationDomainError(LateralCPError):
    """Pairwise summation requested outside its calibration regime."""


class AccuracyError(LateralCPError):
    """
    Quadrature did not reach the requested tolerance.

    Attributes:
        estimate: Best value obtained before giving up
        error_bound: Estimated absolute error of that value
    """

    def __init__(self, message: str, estimate: Optional[float] = None, error_bound: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
