"""
Atomic polarizability models on the imaginary frequency axis.

Three variants share one interface:
- StaticPolarizability: α(iξ) = α0 for every ξ
- LorentzPolarizability: single oscillator α0 / (1 + (ξ/ωA)²)
- TabulatedPolarizability: log-linear interpolation of a measured grid

All models are immutable and safe to share between threads.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from core.constants import C_LIGHT, EPS0
from core.errors import ConfigError, DivergenceError, RangeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

TABLE_TAIL_WARNING = 1e-6


@dataclass(frozen=True)
class StaticPolarizability:
    """Frequency independent polarizability (C·m²/V)."""

    alpha0: float

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ConfigError(f"alpha0 must be positive, got {self.alpha0}")

    @property
    def static_alpha(self) -> float:
        return self.alpha0

    @property
    def characteristic_frequency(self) -> Optional[float]:
        return None

    def alpha_at(self, xi: ArrayLike) -> ArrayLike:
        xi = _check_frequency(xi)
        if np.ndim(xi) == 0:
            return self.alpha0
        return np.full(np.shape(xi), self.alpha0)

    def integrated_alpha(self) -> float:
        raise DivergenceError("integral of a static polarizability over frequency diverges")

    def fingerprint(self) -> str:
        return f"static:{self.alpha0!r}"


@dataclass(frozen=True)
class LorentzPolarizability:
    """Single Lorentz oscillator with resonance ωA (rad/s)."""

    alpha0: float
    omega_a: float

    def __post_init__(self):
        errors = []
        if not self.alpha0 > 0:
            errors.append(f"alpha0 must be positive, got {self.alpha0}")
        if not self.omega_a > 0:
            errors.append(f"omega_a must be positive, got {self.omega_a}")
        if errors:
            raise ConfigError("; ".join(errors))

    @classmethod
    def from_wavelength(cls, alpha0: float, lambda_a: float) -> "LorentzPolarizability":
        """Build the oscillator from the atom's characteristic wavelength λA = 2πc/ωA."""
        if not lambda_a > 0:
            raise ConfigError(f"lambda_a must be positive, got {lambda_a}")
        return cls(alpha0=alpha0, omega_a=2.0 * math.pi * C_LIGHT / lambda_a)

    @property
    def static_alpha(self) -> float:
        return self.alpha0

    @property
    def characteristic_frequency(self) -> Optional[float]:
        return self.omega_a

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.omega_a

    def alpha_at(self, xi: ArrayLike) -> ArrayLike:
        xi = _check_frequency(xi)
        ratio = xi / self.omega_a
        return self.alpha0 / (1.0 + ratio * ratio)

    def integrated_alpha(self) -> float:
        return 0.5 * math.pi * self.alpha0 * self.omega_a

    def fingerprint(self) -> str:
        return f"lorentz:{self.alpha0!r}:{self.omega_a!r}"


@dataclass(frozen=True, eq=False)
class TabulatedPolarizability:
    """
    Polarizability sampled on a strictly increasing frequency grid.

    Interpolation is linear in ξ for log α; evaluation outside the grid raises
    RangeError instead of extrapolating.
    """

    xi: np.ndarray
    alpha: np.ndarray
    _log_alpha: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        errors = []
        if xi.ndim != 1 or alpha.shape != xi.shape:
            errors.append("xi and alpha must be one-dimensional arrays of equal length")
        elif xi.size < 2:
            errors.append("tabulated polarizability needs at least two points")
        else:
            if xi[0] < 0:
                errors.append("tabulated frequencies must be non-negative")
            if np.any(np.diff(xi) <= 0):
                errors.append("tabulated frequencies must be strictly increasing")
            if np.any(alpha <= 0):
                errors.append("tabulated polarizabilities must be positive")
            elif np.any(np.diff(alpha) > 0):
                errors.append("tabulated polarizabilities must be non-increasing in frequency")
        if errors:
            raise ConfigError("; ".join(errors))
        xi.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "_log_alpha", np.log(alpha))

    @property
    def static_alpha(self) -> float:
        if self.xi[0] != 0.0:
            raise RangeError(f"table starts at xi={self.xi[0]:g} rad/s, static value not tabulated")
        return float(self.alpha[0])

    @property
    def characteristic_frequency(self) -> Optional[float]:
        return None

    @property
    def xi_range(self) -> tuple[float, float]:
        return float(self.xi[0]), float(self.xi[-1])

    def alpha_at(self, xi: ArrayLike) -> ArrayLike:
        xi = _check_frequency(xi)
        lo, hi = self.xi_range
        if np.any(xi < lo) or np.any(xi > hi):
            raise RangeError(f"xi outside tabulated range [{lo:g}, {hi:g}] rad/s")
        values = np.exp(np.interp(xi, self.xi, self._log_alpha))
        if np.ndim(values) == 0:
            return float(values)
        return values

    def integrated_alpha(self) -> float:
        """
        Integral over the tabulated range, exact for the log-linear interpolant.

        Nothing beyond the last frequency is included; a warning is logged when
        the last segment, continued exponentially, would add more than
        TABLE_TAIL_WARNING of the total.
        """
        width = np.diff(self.xi)
        a1, a2 = self.alpha[:-1], self.alpha[1:]
        log_ratio = self._log_alpha[1:] - self._log_alpha[:-1]
        flat = np.abs(log_ratio) < 1e-12
        safe = np.where(flat, 1.0, log_ratio)
        segment = np.where(flat, width * 0.5 * (a1 + a2), width * (a2 - a1) / safe)
        total = float(np.sum(segment))
        decay = -log_ratio[-1] / width[-1]
        tail = float(self.alpha[-1]) / decay if decay > 0 else math.inf
        if tail > TABLE_TAIL_WARNING * total:
            logger.warning(
                f"polarizability table ends at xi={self.xi[-1]:g} rad/s; the integral misses about {tail / total:.1e} of its value"
            )
        return total

    def fingerprint(self) -> str:
        digest = hashlib.sha256(self.xi.tobytes() + self.alpha.tobytes()).hexdigest()[:16]
        return f"tabulated:{digest}"


PolarizabilityModel = Union[StaticPolarizability, LorentzPolarizability, TabulatedPolarizability]


def _check_frequency(xi: ArrayLike) -> ArrayLike:
    if np.ndim(xi) == 0:
        xi = float(xi)
        if not xi >= 0:
            raise RangeError(f"frequency must be non-negative, got {xi}")
        return xi
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi >= 0)):
        raise RangeError("frequencies must be non-negative")
    return xi


def alpha_at(model: PolarizabilityModel, xi: ArrayLike) -> ArrayLike:
    """
    Evaluate α(iξ).

    Args:
        model: Polarizability model
        xi: Imaginary frequency in rad/s (scalar or array)

    Returns:
        Polarizability in C·m²/V
    """
    return model.alpha_at(xi)


def integrated_alpha(model: PolarizabilityModel) -> float:
    """Return ∫₀^∞ α(iξ) dξ (C·m²·s⁻¹/V); diverges for a static model."""
    return model.integrated_alpha()


def alpha_from_volume(volume_m3: float) -> float:
    """Convert α(0)/ε₀ given in m³ to SI polarizability."""
    return volume_m3 * EPS0


def load_tabulated_csv(path: Union[str, Path]) -> TabulatedPolarizability:
    """
    Load a tabulated polarizability from a two-column CSV.

    The file must start with a header row (xi_rad_per_s, alpha_si).
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
    except OSError as e:
        raise ConfigError(f"cannot read polarizability table {path}: {e}") from e

    try:
        [float(token) for token in header.split(",")]
    except ValueError:
        pass
    else:
        raise ConfigError(f"polarizability table {path} has no header row")

    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ConfigError(f"malformed polarizability table {path}: {e}") from e
    if data.shape[1] != 2:
        raise ConfigError(f"polarizability table {path} must have exactly two columns")

    logger.info(f"Loaded {data.shape[0]} polarizability samples from {path}")
    return TabulatedPolarizability(xi=data[:, 0], alpha=data[:, 1])
