"""
Response function g(k, zA) of a corrugated perfect mirror.

The lateral first-order potential of an atom is the sum over Fourier components
of the surface profile weighted by g. This module evaluates g

- exactly, by quadrature of the scattering kernel (physics.quadrature)
- in closed form in the retarded (Casimir-Polder) and non-retarded (van der Waals)
  limits
- in the proximity force (PFA) and pairwise summation (PWS) approximations

and the deviation ratios of the approximations from the exact result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union

import numpy as np
from scipy.special import k0e, k1e

from core import database
from core.cache import LRUCache, ZGridCache
from core.config import config
from core.constants import C_LIGHT, EPS0, HBAR
from core.errors import CalibrationDomainError, ConfigError
from core.polarizability import PolarizabilityModel
from physics.quadrature import (
    ResponseValue,
    plane_potential_integral,
    plane_response_integral,
    response_integral,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class ResponseMethod(Enum):
    EXACT = "exact"
    ANALYTIC_CP = "analytic-cp"
    ANALYTIC_VDW = "analytic-vdw"
    PFA = "pfa"
    PWS = "pws"

    @classmethod
    def parse(cls, name: str) -> "ResponseMethod":
        try:
            return cls(name.strip().lower())
        except ValueError:
            known = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown method {name!r} (expected one of: {known})") from None


@dataclass(frozen=True)
class ResponseQuery:
    """Lateral wavenumber k (rad/m) and atom height zA (m)."""

    k: float
    z_a: float

    def __post_init__(self):
        if not self.k >= 0:
            raise ConfigError(f"wavenumber must be non-negative, got {self.k}")
        if not self.z_a > 0:
            raise ConfigError(f"atom height must be positive, got {self.z_a}")

    @property
    def kz(self) -> float:
        return self.k * self.z_a


# Shape functions

def shape_cp(kz: ArrayLike) -> ArrayLike:
    """F(Z) = e^{−Z}(1 + Z + 16Z²/45 + Z³/45)."""
    z = np.asarray(kz, dtype=float)
    out = np.exp(-z) * (1.0 + z + z * z * (16.0 / 45.0 + z / 45.0))
    return float(out) if out.ndim == 0 else out


def shape_pws(kz: ArrayLike) -> ArrayLike:
    """F_PWS(Z) = e^{−Z}(1 + Z + Z²/3)."""
    z = np.asarray(kz, dtype=float)
    out = np.exp(-z) * (1.0 + z + z * z / 3.0)
    return float(out) if out.ndim == 0 else out


def bessel_k23_scaled(x: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """e^x K₂(x) and e^x K₃(x) by upward recurrence from the scaled K₀, K₁."""
    x = np.asarray(x, dtype=float)
    k0 = k0e(x)
    k1 = k1e(x)
    k2 = k0 + (2.0 / x) * k1
    k3 = k1 + (4.0 / x) * k2
    return k2, k3


def shape_vdw(kz: ArrayLike) -> ArrayLike:
    """G(Z) = Z²[2K₂(Z) + Z K₃(Z)], with G(0) = 12."""
    z = np.asarray(kz, dtype=float)
    positive = z > 0
    safe = np.where(positive, z, 1.0)
    k2, k3 = bessel_k23_scaled(safe)
    value = safe * safe * np.exp(-safe) * (2.0 * k2 + safe * k3)
    out = np.where(positive, value, 12.0)
    return float(out) if out.ndim == 0 else out


def cp_scale(alpha0: float, z_a: ArrayLike) -> ArrayLike:
    """3ħcα(0) / (8π²ε₀ zA⁵), the magnitude of the planar CP response."""
    return 3.0 * HBAR * C_LIGHT * alpha0 / (8.0 * math.pi ** 2 * EPS0 * np.asarray(z_a, dtype=float) ** 5)


def calibration_constant(alpha0: float) -> float:
    """
    Pairwise-summation calibration 𝒞 = 15ħcα(0)/(16π³ε₀).

    Fixed so that −𝒞 ∫d³r / |r − r_A|⁷ over a half space reproduces the planar
    retarded potential −3ħcα(0)/(32π²ε₀zA⁴). With it the pairwise response
    −𝒞 ∫d²r e^{−ik·r} / (r² + zA²)^{7/2} is the F_PWS closed form.
    """
    return 15.0 * HBAR * C_LIGHT * alpha0 / (16.0 * math.pi ** 3 * EPS0)


def _cp_form(k: float, z_a: ArrayLike, alpha0: float, shape) -> ArrayLike:
    z = np.asarray(z_a, dtype=float)
    out = -cp_scale(alpha0, z) * shape(k * z)
    return float(out) if np.ndim(out) == 0 else out


# Engine

@dataclass(frozen=True)
class ResponseEngine:
    """
    Evaluator of g(k, zA) by one method for one polarizability model.

    Engines are immutable; the exact method memoizes values in a thread-safe LRU
    and, when LCP_CACHE_DB is set, in the persistent response store.

    Attributes:
        method: Evaluation method
        model: Polarizability model
        rel_tol: Relative tolerance of the exact quadrature
        abs_tol: Absolute tolerance in J/m
        pfa_reference: Method giving the planar response g(0, zA) for the PFA
    """

    method: ResponseMethod
    model: PolarizabilityModel
    rel_tol: float = field(default_factory=lambda: config.rel_tol)
    abs_tol: float = field(default_factory=lambda: config.abs_tol)
    pfa_reference: ResponseMethod = ResponseMethod.ANALYTIC_CP
    _memo: LRUCache = field(init=False, repr=False, compare=False)
    _alpha_static: Optional[float] = field(init=False, repr=False, compare=False, default=None)
    _alpha_integral: Optional[float] = field(init=False, repr=False, compare=False, default=None)
    _reference: Optional["ResponseEngine"] = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ConfigError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.pfa_reference is ResponseMethod.PFA:
            raise ConfigError("PFA reference method cannot itself be PFA")
        object.__setattr__(self, "_memo", LRUCache(max_size=config.memo_size))

        needs = {self.method}
        if self.method is ResponseMethod.PFA:
            needs.add(self.pfa_reference)
        if needs & {ResponseMethod.ANALYTIC_CP, ResponseMethod.PWS}:
            object.__setattr__(self, "_alpha_static", self.model.static_alpha)
        if ResponseMethod.ANALYTIC_VDW in needs:
            object.__setattr__(self, "_alpha_integral", self.model.integrated_alpha())
        if self.method is ResponseMethod.PFA:
            reference = ResponseEngine(self.pfa_reference, self.model, self.rel_tol, self.abs_tol)
            object.__setattr__(self, "_reference", reference)
        logger.debug(f"ResponseEngine ready: method={self.method.value}, model={self.model.fingerprint()}")

    @property
    def label(self) -> str:
        return self.method.value

    def evaluate(self, k: float, z_a: float) -> ResponseValue:
        """g(k, zA) with its error estimate (zero for closed forms)."""
        q = ResponseQuery(k, z_a)
        method = self.method
        if method is ResponseMethod.EXACT:
            return self._exact(q.k, q.z_a)
        if method is ResponseMethod.PFA:
            return self._reference.evaluate(0.0, q.z_a)
        return ResponseValue(float(self._closed_form(method, q.k, q.z_a)))

    def g(self, k: float, z_a: ArrayLike) -> ArrayLike:
        """g(k, zA) in J/m; zA may be an array."""
        if np.ndim(z_a) == 0:
            return self.evaluate(k, float(z_a)).value
        z = np.asarray(z_a, dtype=float)
        if np.any(~(z > 0)) or not k >= 0:
            raise ConfigError("heights must be positive and wavenumber non-negative")
        if self.method is ResponseMethod.PFA:
            return self._reference.g(0.0, z)
        method = self.method
        if method is ResponseMethod.EXACT:
            flat = [self._exact(k, float(zi)).value for zi in z.ravel()]
            return np.array(flat).reshape(z.shape)
        return self._closed_form(method, k, z)

    def g_wavevector(self, k_vec: Iterable[float], z_a: float) -> float:
        """g for a lateral wavevector given by components; depends on |k| only."""
        kx, ky = k_vec
        return self.g(math.hypot(kx, ky), z_a)

    def g_plane(self, z_a: ArrayLike) -> ArrayLike:
        """Planar response g(0, zA) = −dU⁰/dzA."""
        return self.g(0.0, z_a)

    def z_grid_cache(
        self, ks: Iterable[float], z_lo: float, z_hi: float, points: Optional[int] = None, validate: bool = True
    ) -> ZGridCache:
        """Eager z-grid table of this engine's g for the given wavenumbers."""
        cache = ZGridCache(
            self.g, ks, z_lo, z_hi, points=points or config.z_grid_points, rel_tol=self.rel_tol
        )
        if validate:
            cache.validate()
        return cache

    def _closed_form(self, method: ResponseMethod, k: float, z: ArrayLike) -> ArrayLike:
        if method is ResponseMethod.ANALYTIC_CP:
            return _cp_form(k, z, self._alpha_static, shape_cp)
        if method is ResponseMethod.PWS:
            return _cp_form(k, z, self._alpha_static, shape_pws)
        if method is ResponseMethod.ANALYTIC_VDW:
            return _vdw_form(k, z, self._alpha_integral)
        raise ConfigError(f"method {method.value} has no closed form")

    def _exact(self, k: float, z_a: float) -> ResponseValue:
        key = database.ResponseKey(k=float(k), z=float(z_a), model=self.model.fingerprint(), rel_tol=self.rel_tol)
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        stored = database.load_response(key)
        if stored is not None:
            result = ResponseValue(*stored)
        else:
            result = response_integral(k, z_a, self.model, self.rel_tol, self.abs_tol)
            database.save_response(key, result.value, result.error)
        self._memo.set(key, result)
        return result


def _vdw_form(k: float, z_a: ArrayLike, alpha_integral: float) -> ArrayLike:
    z = np.asarray(z_a, dtype=float)
    out = -HBAR * shape_vdw(k * z) * alpha_integral / (64.0 * math.pi ** 2 * EPS0 * z ** 4)
    return float(out) if np.ndim(out) == 0 else out


# Operations

def g_exact(q: ResponseQuery, engine: ResponseEngine) -> float:
    """Exact response by double quadrature (J/m); the engine must use the exact method."""
    if engine.method is not ResponseMethod.EXACT:
        raise ConfigError(f"g_exact needs an exact engine, got {engine.method.value}")
    return engine.evaluate(q.k, q.z_a).value


def g_cp_analytic(q: ResponseQuery, alpha0: float) -> float:
    """Retarded closed form −(3ħcα(0)/8π²ε₀zA⁵) F(k zA)."""
    return _cp_form(q.k, q.z_a, alpha0, shape_cp)


def g_vdw_analytic(q: ResponseQuery, model: PolarizabilityModel) -> float:
    """Non-retarded closed form −(ħ G(k zA)/64π²ε₀zA⁴) ∫α(iξ)dξ."""
    return _vdw_form(q.k, q.z_a, model.integrated_alpha())


def g_pws(q: ResponseQuery, alpha0: float) -> float:
    """Pairwise-summation response −(3ħcα(0)/8π²ε₀zA⁵) F_PWS(k zA)."""
    return _cp_form(q.k, q.z_a, alpha0, shape_pws)


def g_pfa(z_a: float, engine: ResponseEngine) -> float:
    """Proximity-force response: g at k = 0 by the engine's method."""
    return engine.g(0.0, z_a)


def rho_pfa(q: ResponseQuery, engine: ResponseEngine) -> float:
    """g(k, zA) / g(0, zA) under the engine's method (exactly 1 at k = 0)."""
    if q.k == 0.0:
        return 1.0
    return engine.g(q.k, q.z_a) / engine.g(0.0, q.z_a)


def rho_pws(q: ResponseQuery, engine: ResponseEngine) -> float:
    """
    g(k, zA) / g_PWS(k, zA).

    Raises:
        CalibrationDomainError: the engine works outside the retarded regime,
            where the pairwise calibration is meaningless
    """
    if engine.method is ResponseMethod.ANALYTIC_VDW:
        raise CalibrationDomainError("pairwise summation is calibrated in the retarded regime only")
    omega = engine.model.characteristic_frequency
    if engine.method is ResponseMethod.EXACT and omega is not None and q.z_a < C_LIGHT / omega:
        raise CalibrationDomainError(
            f"zA={q.z_a:.3e} m is below c/omegaA={C_LIGHT / omega:.3e} m, outside the retarded regime"
        )
    if q.k == 0.0 and engine.method in (ResponseMethod.ANALYTIC_CP, ResponseMethod.PWS):
        return 1.0
    return engine.g(q.k, q.z_a) / g_pws(q, engine.model.static_alpha)


def plane_potential_cp(z_a: ArrayLike, alpha0: float) -> ArrayLike:
    """Retarded potential above a flat perfect mirror, −3ħcα(0)/(32π²ε₀zA⁴) in J."""
    z = np.asarray(z_a, dtype=float)
    out = -3.0 * HBAR * C_LIGHT * alpha0 / (32.0 * math.pi ** 2 * EPS0 * z ** 4)
    return float(out) if out.ndim == 0 else out


def plane_potential_vdw(z_a: ArrayLike, model: PolarizabilityModel) -> ArrayLike:
    """Non-retarded potential −(ħ/16π²ε₀zA³) ∫α(iξ)dξ in J."""
    z = np.asarray(z_a, dtype=float)
    out = -HBAR * model.integrated_alpha() / (16.0 * math.pi ** 2 * EPS0 * z ** 3)
    return float(out) if out.ndim == 0 else out


def plane_potential(z_a: float, model: PolarizabilityModel, rel_tol: Optional[float] = None) -> float:
    """Potential U⁰(zA) above a flat perfect mirror for any polarizability model (J)."""
    if not z_a > 0:
        raise ConfigError(f"atom height must be positive, got {z_a}")
    return plane_potential_integral(z_a, model, rel_tol or config.rel_tol).value


def plane_response(z_a: float, model: PolarizabilityModel, rel_tol: Optional[float] = None) -> float:
    """−dU⁰/dzA for any polarizability model (J/m); equals g(0, zA)."""
    if not z_a > 0:
        raise ConfigError(f"atom height must be positive, got {z_a}")
    return plane_response_integral(z_a, model, rel_tol or config.rel_tol).value
