"""
First-order nonspecular scattering off a perfectly reflecting corrugated surface.

Kinematics are continued to the imaginary frequency axis ω → iξ with
k_z = iκ for outgoing and −iκ for incoming waves, which keeps every overlap and
reflection coefficient real. Only magnitudes and the relative angle between the
lateral wavevectors enter, so the surface orientation never appears.

The factored pieces (reflection coefficients and polarization overlaps) are
kept for checks; quadrature uses `weighted_kernel_pc`, the combined kernel
multiplied by (ξ/c)², which is finite at ξ = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.constants import C_LIGHT
from core.errors import ConfigError, SingularKinematicsError


class Polarization(Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class ScatterKinematics:
    """
    One outgoing/incoming pair of lateral wavevectors at imaginary frequency ξ.

    Attributes:
        xi: Imaginary frequency (rad/s)
        k_out: Outgoing lateral wavevector magnitude (rad/m)
        k_in: Incoming lateral wavevector magnitude (rad/m)
        delta_phi: Angle from incoming to outgoing lateral wavevector (rad)
    """

    xi: float
    k_out: float
    k_in: float
    delta_phi: float = 0.0

    def __post_init__(self):
        if not (self.xi >= 0 and self.k_out >= 0 and self.k_in >= 0):
            raise ConfigError(f"kinematics need xi, k_out, k_in >= 0, got {self}")

    @property
    def w(self) -> float:
        """ξ/c in rad/m."""
        return self.xi / C_LIGHT

    @property
    def kappa_out(self) -> float:
        return math.hypot(self.w, self.k_out)

    @property
    def kappa_in(self) -> float:
        return math.hypot(self.w, self.k_in)

    @property
    def cos(self) -> float:
        return math.cos(self.delta_phi)

    @property
    def sin(self) -> float:
        return math.sin(self.delta_phi)


def reflection_first_order_pc(p_out: Polarization, p_in: Polarization, kin: ScatterKinematics) -> float:
    """
    First-order reflection coefficient R_{p_out,p_in} of a perfect conductor (rad/m).

    (k, κ) belong to the outgoing leg and (k', κ') to the incoming leg.
    """
    w, c, s = kin.w, kin.cos, kin.sin
    kappa, kappa_in = kin.kappa_out, kin.kappa_in

    if p_out is Polarization.TE and p_in is Polarization.TE:
        return -2.0 * kappa_in * c
    if p_out is Polarization.TE and p_in is Polarization.TM:
        return -2.0 * w * s

    if kappa == 0.0:
        raise SingularKinematicsError("TM reflection undefined for kappa_out = 0")
    if p_in is Polarization.TE:
        return -2.0 * w * kappa_in * s / kappa
    return 2.0 * kin.k_out * kin.k_in / kappa + 2.0 * w * w * c / kappa


def polarization_overlap(p_out: Polarization, p_in: Polarization, kin: ScatterKinematics) -> float:
    """
    Dot product of the outgoing polarization vector with the incoming one.

    Raises:
        SingularKinematicsError: ξ = 0 with a TM leg
    """
    c, s = kin.cos, kin.sin
    if p_out is Polarization.TE and p_in is Polarization.TE:
        return c

    w = kin.w
    if w == 0.0:
        raise SingularKinematicsError("TM polarization vector undefined at xi = 0")
    if p_out is Polarization.TE:
        return kin.kappa_in * s / w
    if p_in is Polarization.TE:
        return kin.kappa_out * s / w
    return -(kin.kappa_out * kin.kappa_in * c + kin.k_out * kin.k_in) / (w * w)


def polarization_sum(kin: ScatterKinematics) -> np.ndarray:
    """2x2 matrix M[p_out, p_in] = Σ_p' overlap(p_out, p') R(p', p_in), order (TE, TM)."""
    pols = (Polarization.TE, Polarization.TM)
    overlap = np.array([[polarization_overlap(a, b, kin) for b in pols] for a in pols])
    reflection = np.array([[reflection_first_order_pc(a, b, kin) for b in pols] for a in pols])
    return overlap @ reflection


def integrand_sum_pc(kin: ScatterKinematics, z_a: float) -> float:
    """
    Reduced kernel (1/2κ_in) e^{−(κ_out+κ_in) zA} Σ_{p,p'} overlap·R.

    Args:
        kin: Scattering kinematics (ξ > 0)
        z_a: Atom height (m)

    Returns:
        Kernel value in rad/m
    """
    if not z_a > 0:
        raise ConfigError(f"atom height must be positive, got {z_a}")
    pols = (Polarization.TE, Polarization.TM)
    total = sum(
        polarization_overlap(a, b, kin) * reflection_first_order_pc(a, b, kin)
        for a in pols
        for b in pols
    )
    decay = math.exp(-(kin.kappa_out + kin.kappa_in) * z_a)
    return decay * total / (2.0 * kin.kappa_in)


def weighted_kernel_pc(w, k_out, k_in, cos_phi, z_a=1.0):
    """
    (ξ/c)² times the reduced kernel, vectorized and regular at ξ = 0.

    With P = k_out k_in cos φ the kernel reads
        e^{−(κo+κi) z} [−2w² − P − k_out² k_in²/(κo κi) − w² P/(κo κi)].
    Units follow the inputs; call it with dimensionless (w z, k z) and z_a = 1
    for the scaled quadrature.
    """
    k_out = np.asarray(k_out, dtype=float)
    k_in = np.asarray(k_in, dtype=float)
    return weighted_kernel_from_dot(w, k_out, k_in, k_out * k_in * np.asarray(cos_phi, dtype=float), z_a)


def weighted_kernel_from_dot(w, k_out, k_in, dot, z_a=1.0):
    """Same kernel as weighted_kernel_pc, taking the dot product P = k_out·k_in directly."""
    w = np.asarray(w, dtype=float)
    k_out = np.asarray(k_out, dtype=float)
    k_in = np.asarray(k_in, dtype=float)
    p = np.asarray(dot, dtype=float)
    w2 = w * w
    kappa_out = np.sqrt(w2 + k_out * k_out)
    kappa_in = np.sqrt(w2 + k_in * k_in)
    prod = kappa_out * kappa_in
    # both ratios vanish when a leg has w = k = 0
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(prod > 0, (k_out * k_in) / np.where(prod > 0, prod, 1.0), 0.0)
        mixed = np.where(prod > 0, w2 * p / np.where(prod > 0, prod, 1.0), 0.0)
    bracket = -2.0 * w2 - p - k_out * k_in * ratio - mixed
    return np.exp(-(kappa_out + kappa_in) * z_a) * bracket
