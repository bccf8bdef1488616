"""
Numerical evaluation of the exact response function.

Everything is scaled by the atom height z: t = ξz/c and q = k'z, so that

    g(k, z) = ħc / (8π³ ε₀ z⁵) ∫₀^∞ dt α(i c t / z) I(t, k z),
    I(t, Z) = ∫ d²q  Φ(t, q, q − Z),

with Φ the ξ²-weighted perfect-conductor kernel. The two-dimensional inner
integral is done in elliptic coordinates with foci at 0 and Z, where
|q| = (Z/2)(cosh μ + cos ν) and |q − Z| = (Z/2)(cosh μ − cos ν) are smooth,
by tensor Gauss-Legendre with order doubling. At Z = 0 the inner integral has
a closed form. The frequency integral uses scipy's adaptive quad on segments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from core.constants import C_LIGHT, EPS0, HBAR
from core.errors import AccuracyError, RangeError
from core.polarizability import PolarizabilityModel, TabulatedPolarizability
from physics.scattering import weighted_kernel_from_dot

logger = logging.getLogger(__name__)

# e^{-DECAY_CUTOFF} bounds the discarded part of the lateral integral
DECAY_CUTOFF = 60.0
T_MAX = 40.0
INNER_START = (32, 16)
INNER_MAX = (1024, 512)
INNER_SAFETY = 0.01
QUAD_LIMIT = 200
BASE_BREAKPOINTS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
RESONANCE_BREAKPOINTS = (0.1, 0.3, 1.0, 3.0, 10.0)


@dataclass(frozen=True)
class ResponseValue:
    """A response value together with its estimated absolute error (both J/m)."""

    value: float
    error: float = 0.0

    def is_accurate(self, rel_tol: float, abs_tol: float = 0.0) -> bool:
        return self.error <= rel_tol * abs(self.value) + abs_tol


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _mapped_rule(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def plane_inner(t):
    """Closed form of I(t, 0) = −4π e^{−2t} (t³/2 + 3t²/4 + 3t/4 + 3/8)."""
    t = np.asarray(t, dtype=float)
    return -4.0 * math.pi * np.exp(-2.0 * t) * (((0.5 * t + 0.75) * t + 0.75) * t + 0.375)


def _elliptic_sum(t: float, kz: float, n_mu: int, n_nu: int, mu_max: float) -> float:
    mu, w_mu = _mapped_rule(n_mu, 0.0, mu_max)
    nu, w_nu = _mapped_rule(n_nu, 0.0, 0.5 * math.pi)
    ch = np.cosh(mu)[:, None]
    cn = np.cos(nu)[None, :]
    f = 0.5 * kz
    a = f * (ch + cn)
    b = f * (ch - cn)
    jac = f * f * (ch * ch - cn * cn)
    dot = 0.5 * (a * a + b * b - kz * kz)
    phi = weighted_kernel_from_dot(t, a, b, dot)
    # ν in [0, π/2] covers a quarter of the plane by the two mirror symmetries
    return 4.0 * float(w_mu @ (phi * jac) @ w_nu)


def inner_integral(t: float, kz: float, rel_tol: float = 1e-6) -> tuple[float, float]:
    """
    Scaled lateral integral I(t, Z).

    Args:
        t: Scaled frequency ξz/c
        kz: Scaled corrugation wavenumber k·z
        rel_tol: Target relative accuracy of the final response value

    Returns:
        (value, absolute error estimate)

    Raises:
        AccuracyError: if order doubling does not settle by the maximum order
    """
    if kz == 0.0:
        return float(plane_inner(t)), 0.0

    reach = math.sqrt(DECAY_CUTOFF * DECAY_CUTOFF + 4.0 * DECAY_CUTOFF * t) / kz
    mu_max = math.acosh(max(reach, 1.0)) + 1.0

    target = INNER_SAFETY * rel_tol
    n_mu, n_nu = INNER_START
    previous = _elliptic_sum(t, kz, n_mu, n_nu, mu_max)
    while True:
        n_mu, n_nu = 2 * n_mu, 2 * n_nu
        current = _elliptic_sum(t, kz, n_mu, n_nu, mu_max)
        change = abs(current - previous)
        if change <= target * abs(current) or change == 0.0:
            return current, change
        if n_mu >= INNER_MAX[0]:
            raise AccuracyError(
                f"lateral integral at t={t:.4g}, kz={kz:.4g} did not converge "
                f"(relative change {change / max(abs(current), 1e-300):.2e})",
                estimate=current,
                error_bound=change,
            )
        previous = current


def frequency_window(model: PolarizabilityModel, z: float) -> tuple[float, float, list[float]]:
    """
    Scaled integration range and breakpoints for the frequency integral.

    Tabulated models are integrated over their tabulated range only.
    """
    scale = C_LIGHT / z
    t_lo, t_hi = 0.0, T_MAX
    if isinstance(model, TabulatedPolarizability):
        xi_lo, xi_hi = model.xi_range
        t_lo = xi_lo / scale
        t_hi = min(T_MAX, xi_hi / scale)
        if xi_lo > 0:
            logger.warning(f"tabulated polarizability starts at xi={xi_lo:g} rad/s, low frequencies omitted")
        if t_hi < T_MAX:
            logger.warning(
                f"tabulated polarizability ends at xi={xi_hi:g} rad/s, frequency integral truncated at t={t_hi:.3g}"
            )
        if t_hi <= t_lo:
            raise RangeError("tabulated frequency range is empty at this height")

    points = set(BASE_BREAKPOINTS)
    omega = model.characteristic_frequency
    if omega is not None:
        t_a = omega / scale
        points.update(t_a * factor for factor in RESONANCE_BREAKPOINTS)
    inner = sorted(p for p in points if t_lo < p < t_hi)
    return t_lo, t_hi, inner


def integrate_frequency(
    weight: Callable[[float], float],
    model: PolarizabilityModel,
    z: float,
    rel_tol: float,
    abs_tol: float,
    label: str = "response",
) -> tuple[float, float]:
    """
    ∫ dt α(ict/z) weight(t) over the scaled frequency window, segment by segment.

    Returns:
        (value, absolute error estimate) in the units of α·weight

    Raises:
        AccuracyError: if quad reports failure with an error above tolerance
    """
    scale = C_LIGHT / z
    t_lo, t_hi, inner = frequency_window(model, z)
    edges = [t_lo, *inner, t_hi]

    def integrand(t: float) -> float:
        return model.alpha_at(scale * t) * weight(t)

    total, total_err, failures = 0.0, 0.0, []
    for lo, hi in zip(edges[:-1], edges[1:]):
        result = quad(integrand, lo, hi, epsrel=rel_tol, epsabs=abs_tol, limit=QUAD_LIMIT, full_output=1)
        total += result[0]
        total_err += result[1]
        if len(result) > 3:
            failures.append(f"[{lo:.3g}, {hi:.3g}]: {result[3].splitlines()[0]}")

    if failures and total_err > rel_tol * abs(total) + abs_tol:
        raise AccuracyError(
            f"{label} frequency integral did not converge on " + "; ".join(failures),
            estimate=total,
            error_bound=total_err,
        )
    return total, total_err


def exact_prefactor(z: float) -> float:
    """ħc / (8π³ ε₀ z⁵) in J/m per unit polarizability."""
    return HBAR * C_LIGHT / (8.0 * math.pi ** 3 * EPS0 * z ** 5)


def response_integral(
    k: float,
    z: float,
    model: PolarizabilityModel,
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-30,
) -> ResponseValue:
    """
    Exact first-order response g(k, z) of a perfect conductor by quadrature.

    Args:
        k: Corrugation wavenumber (rad/m, >= 0)
        z: Atom height (m, > 0)
        model: Polarizability model
        rel_tol: Relative tolerance
        abs_tol: Absolute tolerance in J/m

    Returns:
        ResponseValue in J/m
    """
    kz = k * z
    prefactor = exact_prefactor(z)
    inner_errors: list[float] = []

    def weight(t: float) -> float:
        value, err = inner_integral(t, kz, rel_tol)
        inner_errors.append(abs(err) / max(abs(value), 1e-300))
        return value

    value, err = integrate_frequency(weight, model, z, rel_tol, abs_tol / prefactor, label="response")
    inner_rel = max(inner_errors, default=0.0)
    g = prefactor * value
    error = prefactor * err + inner_rel * abs(g)
    logger.debug(f"g_exact(k={k:.4e}, z={z:.4e}) = {g:.6e} +- {error:.1e} ({len(inner_errors)} lateral integrals)")
    return ResponseValue(g, error)


def plane_potential_integral(
    z: float, model: PolarizabilityModel, rel_tol: float = 1e-6, abs_tol: float = 0.0
) -> ResponseValue:
    """U⁰(z) = −(ħc/4π²ε₀z⁴) ∫dt α e^{−2t}(t²/2 + t/2 + 1/4), in J."""
    prefactor = HBAR * C_LIGHT / (4.0 * math.pi ** 2 * EPS0 * z ** 4)

    def weight(t: float) -> float:
        return -math.exp(-2.0 * t) * ((0.5 * t + 0.5) * t + 0.25)

    value, err = integrate_frequency(weight, model, z, rel_tol, abs_tol / prefactor, label="plane potential")
    return ResponseValue(prefactor * value, prefactor * err)


def plane_response_integral(
    z: float, model: PolarizabilityModel, rel_tol: float = 1e-6, abs_tol: float = 0.0
) -> ResponseValue:
    """−dU⁰/dz = −(ħc/2π²ε₀z⁵) ∫dt α e^{−2t}(t³/2 + 3t²/4 + 3t/4 + 3/8), in J/m."""
    prefactor = exact_prefactor(z)

    def weight(t: float) -> float:
        return float(plane_inner(t))

    value, err = integrate_frequency(weight, model, z, rel_tol, abs_tol / prefactor, label="plane response")
    return ResponseValue(prefactor * value, prefactor * err)


def gauss_on(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [lo, hi]."""
    return _mapped_rule(n, lo, hi)


def order_doubling(
    rule: Callable[[int], float],
    start: int,
    rel_tol: float,
    max_order: int,
    label: str,
    abs_floor: float = 0.0,
) -> tuple[float, float, int]:
    """
    Evaluate rule(n) for n = start, 2·start, ... until successive values agree.

    Returns:
        (value, last change, order used)
    """
    n = start
    previous = rule(n)
    while n < max_order:
        n *= 2
        current = rule(n)
        change = abs(current - previous)
        if change <= rel_tol * abs(current) or change <= abs_floor:
            return current, change, n
        previous = current
    raise AccuracyError(
        f"{label} did not converge by order {max_order}", estimate=previous, error_bound=None
    )
