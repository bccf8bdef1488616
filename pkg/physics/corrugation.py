"""
Corrugation profiles and the first-order lateral potential and force.

Profiles are even and periodic in x with period λc, described by their cosine
coefficients a_n so that h(x) = Σ a_n cos(n kc x). The lateral potential of an
atom at (xA, zA) is U⁽¹⁾ = Σ a_n cos(n kc xA) g(n kc, zA).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import brentq

from core.config import config
from core.errors import ConfigError
from physics.response import ResponseEngine, ResponseMethod

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SERIES_CUTOFF = 1e-12
SMALL_AMPLITUDE_RATIO = 5.0


@dataclass(frozen=True)
class Sinusoid:
    """h(x) = h0 cos(kc x)."""

    h0: float
    lambda_c: float

    def __post_init__(self):
        _check_positive(h0=self.h0, lambda_c=self.lambda_c)

    @property
    def kc(self) -> float:
        return 2.0 * math.pi / self.lambda_c

    @property
    def amplitude(self) -> float:
        return self.h0

    @property
    def max_height(self) -> float:
        return self.h0

    def coefficients(self) -> np.ndarray:
        return np.array([0.0, self.h0])

    def height(self, x: ArrayLike) -> ArrayLike:
        return self.h0 * np.cos(self.kc * np.asarray(x, dtype=float))

    def slope(self, x: ArrayLike) -> ArrayLike:
        return -self.h0 * self.kc * np.sin(self.kc * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class VGrooves:
    """
    Periodic triangular grooves of depth a and width s cut into plateaus.

    The plateau at height a is centered at x = 0 and has width λc − s; the
    surface descends linearly to 0 at the groove centers x = ±λc/2.
    """

    a: float
    s: float
    lambda_c: float
    n_max: int = field(default_factory=lambda: config.n_max)

    def __post_init__(self):
        _check_positive(a=self.a, s=self.s, lambda_c=self.lambda_c)
        if not self.s < self.lambda_c:
            raise ConfigError(f"groove width s={self.s} must be smaller than the period {self.lambda_c}")
        if self.n_max < 1:
            raise ConfigError(f"n_max must be at least 1, got {self.n_max}")

    @property
    def kc(self) -> float:
        return 2.0 * math.pi / self.lambda_c

    @property
    def amplitude(self) -> float:
        return self.a

    @property
    def max_height(self) -> float:
        return self.a

    @property
    def plateau_half_width(self) -> float:
        return 0.5 * (self.lambda_c - self.s)

    def coefficients(self) -> np.ndarray:
        n = np.arange(1, self.n_max + 1)
        sign = np.where(n % 2 == 1, 1.0, -1.0)
        scale = 2.0 * self.a * self.lambda_c / (math.pi ** 2 * self.s)
        a_n = sign * scale * (1.0 - np.cos(n * math.pi * self.s / self.lambda_c)) / n ** 2
        return np.concatenate(([self.a * (1.0 - self.s / (2.0 * self.lambda_c))], a_n))

    def _reduced(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        half = 0.5 * self.lambda_c
        return np.mod(x + half, self.lambda_c) - half

    def height(self, x: ArrayLike) -> ArrayLike:
        u = np.abs(self._reduced(x))
        out = np.where(u <= self.plateau_half_width, self.a, 2.0 * self.a * (0.5 * self.lambda_c - u) / self.s)
        return float(out) if out.ndim == 0 else out

    def slope(self, x: ArrayLike) -> ArrayLike:
        r = self._reduced(x)
        in_groove = np.abs(r) > self.plateau_half_width
        out = np.where(in_groove, -np.sign(r) * 2.0 * self.a / self.s, 0.0)
        return float(out) if out.ndim == 0 else out

    def kinks(self) -> list[tuple[float, float]]:
        """Kink positions in [−λc/2, λc/2] and the jump of h' across each."""
        p = self.plateau_half_width
        edge = 2.0 * self.a / self.s
        return [(-p, -edge), (p, -edge), (0.5 * self.lambda_c, 2.0 * edge)]


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Profile given directly by its cosine coefficients a_0..a_N (m)."""

    lambda_c: float
    values: np.ndarray

    def __post_init__(self):
        _check_positive(lambda_c=self.lambda_c)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0 or not np.all(np.isfinite(values)):
            raise ConfigError("Fourier coefficients must be a non-empty finite sequence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def kc(self) -> float:
        return 2.0 * math.pi / self.lambda_c

    @property
    def amplitude(self) -> float:
        return float(np.sum(np.abs(self.values[1:])))

    @property
    def max_height(self) -> float:
        return float(self.values[0] + self.amplitude)

    def coefficients(self) -> np.ndarray:
        return self.values.copy()

    def height(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        n = np.arange(self.values.size)
        out = np.tensordot(np.cos(self.kc * np.multiply.outer(x, n)), self.values, axes=([-1], [0]))
        return float(out) if np.ndim(out) == 0 else out

    def slope(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        n = np.arange(self.values.size)
        out = -np.tensordot(np.sin(self.kc * np.multiply.outer(x, n)), n * self.kc * self.values, axes=([-1], [0]))
        return float(out) if np.ndim(out) == 0 else out


CorrugationProfile = Union[Sinusoid, VGrooves, FourierSeries]


@dataclass(frozen=True)
class LateralPotentialSample:
    """U⁽¹⁾ at one atom position for one method."""

    x_a: float
    z_a: float
    u1: float
    method: str


def _check_positive(**values: float) -> None:
    bad = [f"{name}={value}" for name, value in values.items() if not value > 0]
    if bad:
        raise ConfigError("profile lengths must be positive: " + ", ".join(bad))


def check_small_amplitude(profile: CorrugationProfile, z_a: float) -> bool:
    """Warn when the corrugation is not the smallest length scale; returns True if fine."""
    amp = profile.amplitude
    ok = True
    if amp * SMALL_AMPLITUDE_RATIO > z_a:
        logger.warning(f"corrugation amplitude {amp:.3e} m exceeds zA/5 at zA={z_a:.3e} m")
        ok = False
    if amp * SMALL_AMPLITUDE_RATIO > profile.lambda_c:
        logger.warning(f"corrugation amplitude {amp:.3e} m exceeds lambda_c/5 ({profile.lambda_c:.3e} m)")
        ok = False
    return ok


def fourier_coefficients(profile: CorrugationProfile) -> np.ndarray:
    """Cosine coefficients a_0, a_1, ... of the profile (m)."""
    return profile.coefficients()


class SeriesTerms(NamedTuple):
    """Harmonics kept in a truncated series and an estimate of what was dropped."""

    ns: np.ndarray
    a_n: np.ndarray
    g_n: np.ndarray
    truncation: float


def _cutoff_tail(profile: CorrugationProfile, power: int, last_g: float) -> float:
    """|g_N| Σ_{N<m<=2N} m^power |a_m| for a grooved profile stopped at its n_max."""
    if not isinstance(profile, VGrooves):
        return 0.0
    n_max = profile.n_max
    extended = replace(profile, n_max=2 * n_max).coefficients()
    ms = np.arange(n_max + 1, 2 * n_max + 1)
    return last_g * float(np.sum(ms.astype(float) ** power * np.abs(extended[n_max + 1 :])))


def series_terms(profile: CorrugationProfile, z_a: float, engine: ResponseEngine, power: int = 0) -> SeriesTerms:
    """
    Harmonics n, coefficients a_n and responses g(n kc, zA) kept in the sum.

    The sum stops at the first n where the bound |g_n| Σ_{m>=n} m^power |a_m|
    on the remaining terms falls below SERIES_CUTOFF times the n^power-weighted
    magnitude already summed. |g(k, z)| decreases with k, which makes the bound
    valid. When the grooves run out of harmonics first, `truncation` carries
    the next block of n_max terms weighted by the last |g_n| and a warning is
    logged.
    """
    coeffs = profile.coefficients()
    ns = np.arange(coeffs.size)
    weighted = np.abs(coeffs) * ns.astype(float) ** power
    tail = np.cumsum(weighted[::-1])[::-1]

    kept_n, kept_a, kept_g = [], [], []
    summed = 0.0
    last_g = 0.0
    truncation = 0.0
    for n in ns:
        if n > 0 and tail[n] == 0.0:
            break
        if coeffs[n] == 0.0 or (power > 0 and n == 0):
            continue
        g_n = engine.g(n * profile.kc, z_a)
        if summed > 0.0 and abs(g_n) * tail[n] < SERIES_CUTOFF * summed:
            truncation = abs(g_n) * tail[n]
            break
        kept_n.append(n)
        kept_a.append(coeffs[n])
        kept_g.append(g_n)
        summed += weighted[n] * abs(g_n)
        last_g = abs(g_n)
    else:
        truncation = _cutoff_tail(profile, power, last_g)
        if summed > 0.0 and truncation > SERIES_CUTOFF * summed:
            logger.warning(
                f"series stopped at n_max={coeffs.size - 1} before converging at kc*zA={profile.kc * z_a:.3g} "
                f"(power {power}); dropped terms estimated at {truncation / summed:.2e} of the sum"
            )
    return SeriesTerms(np.array(kept_n, dtype=int), np.array(kept_a), np.array(kept_g), truncation)


def _uses_local_height(engine: ResponseEngine) -> bool:
    return engine.method is ResponseMethod.PFA


def lateral_potential(profile: CorrugationProfile, x_a: ArrayLike, z_a: float, engine: ResponseEngine) -> ArrayLike:
    """
    First-order lateral potential U⁽¹⁾(xA, zA) in J.

    The PFA engine uses the local-height rule U⁽¹⁾ = h(xA) g(0, zA) on the exact
    real-space profile instead of the truncated series.
    """
    x = np.asarray(x_a, dtype=float)
    if _uses_local_height(engine):
        out = profile.height(x) * engine.g_plane(z_a)
    else:
        ns, a_n, g_n, _ = series_terms(profile, z_a, engine)
        phases = np.cos(profile.kc * np.multiply.outer(x, ns))
        out = phases @ (a_n * g_n)
    return float(out) if np.ndim(out) == 0 else out


def lateral_force(profile: CorrugationProfile, x_a: ArrayLike, z_a: float, engine: ResponseEngine) -> ArrayLike:
    """Lateral force −∂U⁽¹⁾/∂xA in N."""
    x = np.asarray(x_a, dtype=float)
    if _uses_local_height(engine):
        out = -profile.slope(x) * engine.g_plane(z_a)
    else:
        ns, a_n, g_n, _ = series_terms(profile, z_a, engine, power=1)
        phases = np.sin(profile.kc * np.multiply.outer(x, ns))
        out = phases @ (ns * profile.kc * a_n * g_n)
    return float(out) if np.ndim(out) == 0 else out


def sample_potential(
    profile: CorrugationProfile, xs: np.ndarray, z_a: float, engine: ResponseEngine
) -> list[LateralPotentialSample]:
    """U⁽¹⁾ at each x as immutable samples tagged with the engine's method."""
    values = np.atleast_1d(lateral_potential(profile, xs, z_a, engine))
    return [LateralPotentialSample(float(x), z_a, float(u), engine.label) for x, u in zip(np.atleast_1d(xs), values)]


def effective_sine_amplitude(profile: VGrooves, z_a: float, engine: ResponseEngine) -> float:
    """Amplitude a_1 g(kc, zA) of the first harmonic of the grooved potential (J)."""
    if profile.kc * z_a < 2.0:
        logger.warning(f"kc*zA={profile.kc * z_a:.3g} < 2, higher harmonics are not negligible")
    return float(profile.coefficients()[1]) * engine.g(profile.kc, z_a)


def _width_condition(u: float) -> float:
    return math.sin(0.5 * u) - u * math.cos(0.5 * u)


def optimal_groove_width(lambda_c: float) -> float:
    """Groove width maximizing the first-harmonic amplitude, about 0.742 λc (m)."""
    if not lambda_c > 0:
        raise ConfigError(f"lambda_c must be positive, got {lambda_c}")
    u = brentq(_width_condition, 1.0, math.pi, xtol=1e-15, rtol=1e-13)
    return lambda_c * u / math.pi


def load_fourier_csv(path: Union[str, Path], lambda_c: float) -> FourierSeries:
    """
    Load a profile from a CSV with header (n, a_n_meters).

    Harmonics missing from the file are zero.
    """
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read Fourier table {path}: {e}") from e
    if data.shape[1] != 2:
        raise ConfigError(f"Fourier table {path} must have exactly two columns")
    ns = data[:, 0]
    if np.any(ns < 0) or np.any(ns != np.round(ns)):
        raise ConfigError(f"Fourier table {path} has invalid harmonic indices")
    values = np.zeros(int(ns.max()) + 1)
    values[ns.astype(int)] = data[:, 1]
    logger.info(f"Loaded {len(ns)} Fourier coefficients from {path}")
    return FourierSeries(lambda_c=lambda_c, values=values)


def profile_with_period(profile: CorrugationProfile, lambda_c: float, s_fraction: Optional[float] = None) -> CorrugationProfile:
    """Copy of a profile rescaled to a new period (groove width kept as a fraction of it)."""
    if isinstance(profile, VGrooves):
        fraction = s_fraction if s_fraction is not None else profile.s / profile.lambda_c
        return VGrooves(a=profile.a, s=fraction * lambda_c, lambda_c=lambda_c, n_max=profile.n_max)
    if isinstance(profile, Sinusoid):
        return Sinusoid(h0=profile.h0, lambda_c=lambda_c)
    return FourierSeries(lambda_c=lambda_c, values=profile.values)
