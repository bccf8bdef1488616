"""
Physical constants used by every computation module.

Values come from scipy.constants (CODATA) and are frozen at import time.
"""

from dataclasses import dataclass

from scipy import constants as _codata


@dataclass(frozen=True)
class Constants:
    """CODATA constants in SI units."""

    hbar: float = _codata.hbar
    c: float = _codata.c
    eps0: float = _codata.epsilon_0

    def __post_init__(self):
        if min(self.hbar, self.c, self.eps0) <= 0:
            raise ValueError("physical constants must be strictly positive")


CONSTANTS = Constants()

HBAR = CONSTANTS.hbar
C_LIGHT = CONSTANTS.c
EPS0 = CONSTANTS.eps0
