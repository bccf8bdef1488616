"""
Dipole-frequency shift of a trapped condensate above a corrugated mirror.

The lateral potential adds curvature ∂²U⁽¹⁾/∂x² to the harmonic trap. Averaged
over the normalized two-dimensional Thomas-Fermi column density n₀(x, z) this
shifts the x dipole frequency by the relative amount

    γ = (1 / 2mωx²) ∫ dx dz n₀(x, z) ∂²U⁽¹⁾/∂x²(x, zCM + z).

With the series form of U⁽¹⁾ and polar coordinates x = Rρ cos θ, z = Rρ sin θ,
ρ = sin φ, the density weight becomes (15/6π) sin φ cos⁴φ dφ dθ, a smooth
integrand on a rectangle. The single atom (R = 0) keeps only the curvature at
the crest center.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import dblquad

from core.config import config
from core.errors import ConfigError, SurfaceContactError
from physics.corrugation import CorrugationProfile, VGrooves, profile_with_period, series_terms
from physics.quadrature import gauss_on, order_doubling
from physics.response import ResponseEngine, ResponseMethod
from tools.scan import ScanResult, flag_inaccurate, guarded, run_points

logger = logging.getLogger(__name__)

DISK_START = 32
DISK_MAX = 1024
DENSITY_WEIGHT = 15.0 / (6.0 * math.pi)


@dataclass(frozen=True)
class BecConfig:
    """
    Trapped atom cloud oscillating along x above the surface.

    Attributes:
        mass: Atomic mass (kg)
        omega_x: Trap angular frequency along the corrugation (rad/s)
        tf_radius: Thomas-Fermi radius R (m); 0 is a single atom
        z_cm: Center-of-mass height above the mean surface plane (m)
        omega_y: Weak-axis trap frequency (rad/s), recorded only
        omega_z: Vertical trap frequency (rad/s), recorded only
    """

    mass: float
    omega_x: float
    tf_radius: float
    z_cm: float
    omega_y: Optional[float] = None
    omega_z: Optional[float] = None

    def __post_init__(self):
        errors = []
        for name in ("mass", "omega_x", "z_cm"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be positive, got {getattr(self, name)}")
        if not self.tf_radius >= 0:
            errors.append(f"tf_radius must be non-negative, got {self.tf_radius}")
        elif not self.tf_radius < self.z_cm:
            errors.append(f"tf_radius {self.tf_radius} must be below z_cm {self.z_cm}")
        if errors:
            raise ConfigError("Invalid condensate configuration: " + "; ".join(errors))

    @classmethod
    def from_frequency_hz(cls, mass: float, frequency_hz: float, tf_radius: float, z_cm: float) -> "BecConfig":
        return cls(mass=mass, omega_x=2.0 * math.pi * frequency_hz, tf_radius=tf_radius, z_cm=z_cm)

    @property
    def curvature_scale(self) -> float:
        """1 / (2 m ωx²): converts potential curvature (J/m²) into γ."""
        return 1.0 / (2.0 * self.mass * self.omega_x ** 2)

    def check_clearance(self, profile: CorrugationProfile) -> None:
        """Raise SurfaceContactError if the cloud reaches the highest point of the surface."""
        lowest = self.z_cm - self.tf_radius
        if not lowest > profile.max_height:
            raise SurfaceContactError(
                f"cloud bottom at {lowest:.4e} m does not clear the surface maximum {profile.max_height:.4e} m"
            )


@dataclass(frozen=True)
class ThomasFermiDensity:
    """Normalized column density n₀ = (15/6πR⁵)(R² − x² − z²)^{3/2} on the disk of radius R."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"Thomas-Fermi radius must be positive, got {self.radius}")

    def __call__(self, x, z):
        r = self.radius
        inside = np.clip(r * r - np.asarray(x, dtype=float) ** 2 - np.asarray(z, dtype=float) ** 2, 0.0, None)
        out = DENSITY_WEIGHT / r ** 5 * inside ** 1.5
        return float(out) if np.ndim(out) == 0 else out

    def norm(self, epsabs: float = 1e-10, epsrel: float = 1e-10) -> float:
        """∫∫ n₀ dx dz over the disk by adaptive quadrature."""
        r = self.radius
        value, _ = dblquad(
            lambda z, x: self(x, z),
            -r,
            r,
            lambda x: -math.sqrt(max(r * r - x * x, 0.0)),
            lambda x: math.sqrt(max(r * r - x * x, 0.0)),
            epsabs=epsabs,
            epsrel=epsrel,
        )
        return value


def thomas_fermi_density(radius: float, x, z):
    """n₀(x, z) in 1/m²."""
    return ThomasFermiDensity(radius)(x, z)


def density_norm(radius: float) -> float:
    """Quadrature of n₀ over its disk; 1 up to quadrature error."""
    return ThomasFermiDensity(radius).norm()


def gamma_single_atom(profile: CorrugationProfile, bec: BecConfig, engine: ResponseEngine) -> float:
    """
    Relative frequency shift of one atom held above the crest center xA = 0.

    γ = −(kc² / 2mωx²) Σ n² a_n g(n kc, zCM). The PFA sees a flat plateau
    under a grooved surface and predicts exactly zero.
    """
    return _single_atom(profile, bec, engine)[0]


def _single_atom(profile: CorrugationProfile, bec: BecConfig, engine: ResponseEngine) -> tuple[float, float]:
    bec.check_clearance(profile)
    if engine.method is ResponseMethod.PFA and isinstance(profile, VGrooves):
        return 0.0, 0.0
    ns, a_n, g_n, truncation = series_terms(profile, bec.z_cm, engine, power=2)
    scale = bec.curvature_scale * profile.kc ** 2
    return -scale * float(np.sum(ns.astype(float) ** 2 * a_n * g_n)), scale * truncation


def gamma_bec(profile: CorrugationProfile, bec: BecConfig, engine: ResponseEngine) -> float:
    """Relative frequency shift of the condensate, density-averaged curvature of U⁽¹⁾."""
    return gamma_with_error(profile, bec, engine)[0]


def gamma_with_error(profile: CorrugationProfile, bec: BecConfig, engine: ResponseEngine) -> tuple[float, float]:
    """
    γ together with its error: the change of the last quadrature doubling plus
    the estimated harmonics dropped at n_max.

    Raises:
        SurfaceContactError: the condensate reaches the surface
        AccuracyError: the disk quadrature does not settle
    """
    bec.check_clearance(profile)
    if bec.tf_radius == 0.0:
        return _single_atom(profile, bec, engine)
    if engine.method is ResponseMethod.PFA and isinstance(profile, VGrooves):
        return _pfa_kink_gamma(profile, bec, engine)
    return _series_gamma(profile, bec, engine)


def _height_lookup(
    engine: ResponseEngine, ks: Sequence[float], z_lo: float, z_hi: float
) -> Callable[[float, np.ndarray], np.ndarray]:
    if engine.method is ResponseMethod.EXACT:
        return engine.z_grid_cache(ks, z_lo, z_hi).g
    return engine.g


def _series_gamma(profile: CorrugationProfile, bec: BecConfig, engine: ResponseEngine) -> tuple[float, float]:
    r, z_cm = bec.tf_radius, bec.z_cm
    # |g| is largest at the bottom of the cloud, so the cutoff chosen there holds everywhere
    ns, a_n, _, truncation = series_terms(profile, z_cm - r, engine, power=2)
    if ns.size == 0:
        return 0.0, 0.0
    ks = [float(n * profile.kc) for n in ns]
    lookup = _height_lookup(engine, ks, z_cm - r, z_cm + r)
    weights = ns.astype(float) ** 2 * a_n

    def disk_average(n: int) -> float:
        phi, w_phi = gauss_on(n, 0.0, 0.5 * math.pi)
        n_theta = 2 * n
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        rho = np.sin(phi)
        radial = w_phi * rho * np.cos(phi) ** 4 * (2.0 * math.pi / n_theta)
        x = r * np.multiply.outer(rho, np.cos(theta))
        z = z_cm + r * np.multiply.outer(rho, np.sin(theta))
        total = 0.0
        for k, weight in zip(ks, weights):
            total += weight * float(np.sum(radial[:, None] * lookup(k, z) * np.cos(k * x)))
        return DENSITY_WEIGHT * total

    average, change, order = order_doubling(
        disk_average, DISK_START, engine.rel_tol, DISK_MAX, label="condensate quadrature"
    )
    scale = -bec.curvature_scale * profile.kc ** 2
    logger.debug(f"gamma R={r:.3e} zCM={z_cm:.3e}: {ns.size} harmonics, order {order}")
    # dropped harmonics are bounded by their size at the cloud bottom
    return scale * average, abs(scale) * (change + truncation)


def _kink_images(x0: float, period: float, radius: float) -> list[float]:
    first = math.ceil((-radius - x0) / period)
    last = math.floor((radius - x0) / period)
    return [x0 + m * period for m in range(first, last + 1) if abs(x0 + m * period) < radius]


def _pfa_kink_gamma(profile: VGrooves, bec: BecConfig, engine: ResponseEngine) -> tuple[float, float]:
    """
    PFA curvature h''(x) g(0, z) of a piecewise-linear profile.

    h'' is a sum of delta functions at the kinks, so only kinks inside the disk
    contribute, each through a line integral of n₀ g(0, ·) along z.
    """
    r, z_cm = bec.tf_radius, bec.z_cm
    total, error = 0.0, 0.0
    for x0, jump in profile.kinks():
        for xk in _kink_images(x0, profile.lambda_c, r):
            half = math.sqrt(r * r - xk * xk)

            def chord(n: int, half=half) -> float:
                phi, w_phi = gauss_on(n, -0.5 * math.pi, 0.5 * math.pi)
                return float(np.sum(w_phi * np.cos(phi) ** 4 * engine.g_plane(z_cm + half * np.sin(phi))))

            value, change, _ = order_doubling(chord, DISK_START, engine.rel_tol, DISK_MAX, label="kink chord")
            factor = jump * DENSITY_WEIGHT * half ** 4 / r ** 5
            total += factor * value
            error += abs(factor) * change
    scale = bec.curvature_scale
    return scale * total, scale * error


def gamma_scan(
    profile: CorrugationProfile,
    bec: BecConfig,
    engines: Sequence[ResponseEngine],
    kcz_values: Optional[Sequence[float]] = None,
    radii: Optional[Sequence[float]] = None,
    s_fraction: Optional[float] = None,
    threads: int = 1,
    command: str = "bec-shift",
) -> ScanResult:
    """
    γ over Thomas-Fermi radii and corrugation periods for each engine.

    Args:
        profile: Surface profile; rescaled to λc = 2π zCM / (kc zCM) per point
            when kcz_values is given
        bec: Condensate; its tf_radius is replaced by each entry of radii
        engines: One engine per method column
        kcz_values: kc·zCM grid (default: the profile's own period)
        radii: Thomas-Fermi radii (default: bec.tf_radius)
        s_fraction: Groove width as a fraction of the period when rescaling
        threads: Worker threads
        command: Command name recorded in the result

    Returns:
        ScanResult with one "gamma" row per point per engine, radii outermost
    """
    kczs = list(kcz_values) if kcz_values is not None else [profile.kc * bec.z_cm]
    rs = list(radii) if radii is not None else [bec.tf_radius]
    for name, values in (("kcz", kczs), ("radius", rs)):
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError(f"{name} grid must be strictly increasing")
    if any(v <= 0 for v in kczs):
        raise ConfigError("kc*zCM values must be positive")

    points = [(r, kcz) for r in rs for kcz in kczs]

    def compute(index: int, point: tuple[float, float]):
        r, kcz = point
        cfg = replace(bec, tf_radius=r)
        prof = profile
        if kcz_values is not None:
            prof = profile_with_period(profile, 2.0 * math.pi * bec.z_cm / kcz, s_fraction)
        inputs = dict(k_rad_per_m=prof.kc, z_m=cfg.z_cm, kz=kcz, tf_radius_m=r)
        return [
            flag_inaccurate(
                guarded(index, engine.label, "gamma", lambda e=engine: gamma_with_error(prof, cfg, e), **inputs),
                engine.rel_tol,
            )
            for engine in engines
        ]

    logger.info(f"gamma scan: {len(rs)} radii x {len(kczs)} periods x {len(engines)} methods")
    rows = run_points(compute, points, threads=threads, label=command)
    return ScanResult(command=command, rows=rows)


def fig4_scan(
    kcz_values: Sequence[float],
    radii: Sequence[float],
    bec: BecConfig,
    depth: float,
    engines: Sequence[ResponseEngine],
    s_fraction: float = 0.5,
    threads: int = 1,
    n_max: Optional[int] = None,
) -> ScanResult:
    """
    γ versus kc·zCM for grooves of depth `depth` and width s_fraction·λc, one curve per radius.

    n_max defaults to the process-wide setting.
    """
    if not kcz_values:
        raise ConfigError("fig4 needs at least one kc*zCM value")
    lambda_c = 2.0 * math.pi * bec.z_cm / kcz_values[0]
    base = VGrooves(a=depth, s=s_fraction * lambda_c, lambda_c=lambda_c, n_max=n_max or config.n_max)
    return gamma_scan(
        base, bec, engines, kcz_values=kcz_values, radii=radii, s_fraction=s_fraction, threads=threads, command="fig4"
    )
