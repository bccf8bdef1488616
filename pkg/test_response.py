#!/usr/bin/env python3
"""Test the response function: closed forms, exact quadrature, ratios and caching."""

import math
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest
from scipy.integrate import dblquad, quad
from scipy.special import kn

import physics.response as response_module
from core import database
from core.constants import C_LIGHT
from core.errors import CalibrationDomainError, ConfigError
from core.polarizability import LorentzPolarizability, StaticPolarizability, alpha_from_volume
from physics.quadrature import (
    ResponseValue,
    inner_integral,
    plane_inner,
    response_integral,
)
from physics.response import (
    ResponseEngine,
    ResponseMethod,
    ResponseQuery,
    calibration_constant,
    g_cp_analytic,
    g_exact,
    g_pfa,
    g_pws,
    g_vdw_analytic,
    plane_potential,
    plane_potential_cp,
    plane_potential_vdw,
    plane_response,
    rho_pfa,
    rho_pws,
    shape_cp,
    shape_pws,
    shape_vdw,
)
from physics.scattering import weighted_kernel_from_dot

ALPHA0 = alpha_from_volume(47.3e-30)
STATIC = StaticPolarizability(ALPHA0)
LORENTZ = LorentzPolarizability.from_wavelength(ALPHA0, 780e-9)


def engine(method, model=STATIC, **kwargs):
    return ResponseEngine(ResponseMethod.parse(method), model, **kwargs)


# Closed forms

def test_shape_functions_at_zero():
    assert shape_cp(0.0) == 1.0
    assert shape_pws(0.0) == 1.0
    assert shape_vdw(0.0) == 12.0
    assert shape_vdw(1e-3) == pytest.approx(12.0, rel=1e-5)


def test_shape_vdw_matches_scipy_bessel():
    for z in (0.3, 1.0, 2.5, 7.0):
        expected = z * z * (2 * kn(2, z) + z * kn(3, z))
        assert shape_vdw(z) == pytest.approx(expected, rel=1e-12)


def test_shapes_vectorize():
    z = np.linspace(0.0, 10.0, 11)
    assert shape_cp(z).shape == (11,)
    assert np.all(np.diff(shape_cp(z)) < 0)
    assert np.all(np.diff(shape_vdw(z)) < 0)


def test_cp_closed_form_polynomial():
    for z in np.linspace(0.1, 10.0, 12):
        poly = math.exp(-z) * (1 + z + 16 * z ** 2 / 45 + z ** 3 / 45)
        q = ResponseQuery(z / 1e-6, 1e-6)
        scale = 3 * 1.054571817e-34 * C_LIGHT * ALPHA0 / (8 * math.pi ** 2 * 8.8541878128e-12 * 1e-30)
        assert g_cp_analytic(q, ALPHA0) == pytest.approx(-scale * poly, rel=1e-8)


def test_ratio_numbers_at_kz_355():
    cp = engine("analytic-cp")
    q = ResponseQuery(3.55 / 2e-6, 2e-6)
    assert rho_pfa(q, cp) == pytest.approx(0.288, abs=0.003)
    assert rho_pws(q, cp) == pytest.approx(1.146, abs=0.01)


def test_ratios_at_zero_wavenumber():
    q = ResponseQuery(0.0, 1e-6)
    assert rho_pfa(q, engine("analytic-cp")) == 1.0
    assert rho_pfa(q, engine("analytic-vdw", LORENTZ)) == 1.0
    assert rho_pws(q, engine("analytic-cp")) == 1.0


def test_rho_pws_is_at_least_one_and_pfa_decreasing():
    cp = engine("analytic-cp")
    z = 1e-6
    pfa = [rho_pfa(ResponseQuery(kz / z, z), cp) for kz in np.linspace(0.0, 10.0, 41)]
    pws = [rho_pws(ResponseQuery(kz / z, z), cp) for kz in np.linspace(0.0, 10.0, 41)]
    assert all(b < a for a, b in zip(pfa, pfa[1:]))
    assert all(r >= 1.0 for r in pws)


def test_rho_pws_refused_outside_retarded_regime():
    q = ResponseQuery(1e6, 1e-6)
    with pytest.raises(CalibrationDomainError):
        rho_pws(q, engine("analytic-vdw", LORENTZ))
    near = ResponseQuery(1e8, 1e-9)
    with pytest.raises(CalibrationDomainError):
        rho_pws(near, engine("exact", LORENTZ))


def test_vdw_closed_form_at_zero():
    z = 5e-9
    g0 = g_vdw_analytic(ResponseQuery(0.0, z), LORENTZ)
    expected = -1.054571817e-34 * 12 * LORENTZ.integrated_alpha() / (64 * math.pi ** 2 * 8.8541878128e-12 * z ** 4)
    assert g0 == pytest.approx(expected, rel=1e-8)
    # −dU⁰/dz of the non-retarded plane potential
    h = 1e-4 * z
    derivative = -(plane_potential_vdw(z + h, LORENTZ) - plane_potential_vdw(z - h, LORENTZ)) / (2 * h)
    assert g0 == pytest.approx(derivative, rel=1e-6)


def test_pws_matches_pairwise_integral():
    rng = np.random.default_rng(5)
    c = calibration_constant(ALPHA0)
    for _ in range(5):
        z = 10 ** rng.uniform(-7, -5)
        kz = rng.uniform(0.05, 5.0)
        # dimensionless r -> r z; the kernel scales as z^-5
        inner, _ = dblquad(
            lambda theta, r: r * math.cos(kz * r * math.cos(theta)) / (r * r + 1.0) ** 3.5,
            0.0, 60.0, 0.0, math.pi,
            epsabs=1e-13, epsrel=1e-10,
        )
        brute = -c * 2.0 * inner / z ** 5
        assert g_pws(ResponseQuery(kz / z, z), ALPHA0) == pytest.approx(brute, rel=1e-6)


def test_pws_calibration_reproduces_plane_potential():
    z = 1.3e-6
    c = calibration_constant(ALPHA0)
    # −𝒞 ∫ d²r ∫_{-∞}^0 dz' |r − r_A|^-7 = −𝒞 π / (10 zA⁴)
    assert -c * math.pi / (10 * z ** 4) == pytest.approx(plane_potential_cp(z, ALPHA0), rel=1e-12)


def test_pfa_engine_ignores_wavenumber():
    pfa = engine("pfa")
    assert pfa.g(1e7, 1e-6) == pfa.g(0.0, 1e-6)
    assert g_pfa(1e-6, pfa) == pytest.approx(g_cp_analytic(ResponseQuery(0.0, 1e-6), ALPHA0))


def test_engine_vectorized_heights():
    cp = engine("analytic-cp")
    z = np.array([[1e-6, 2e-6], [3e-6, 4e-6]])
    values = cp.g(1e6, z)
    assert values.shape == (2, 2)
    assert values[1, 1] == pytest.approx(cp.g(1e6, 4e-6))


def test_engine_validation():
    with pytest.raises(ConfigError):
        ResponseQuery(-1.0, 1e-6)
    with pytest.raises(ConfigError):
        ResponseQuery(1.0, 0.0)
    with pytest.raises(ConfigError):
        ResponseMethod.parse("magic")
    with pytest.raises(ConfigError):
        engine("analytic-cp", rel_tol=0.0)
    with pytest.raises(ConfigError):
        engine("pfa", pfa_reference=ResponseMethod.PFA)
    with pytest.raises(ConfigError):
        g_exact(ResponseQuery(1.0, 1e-6), engine("pws"))


def test_g_wavevector_depends_on_modulus():
    cp = engine("analytic-cp")
    assert cp.g_wavevector((3e6, 4e6), 1e-6) == pytest.approx(cp.g(5e6, 1e-6))


# Plane potential

def test_plane_potential_static_limit():
    z = 1e-6
    assert plane_potential(z, STATIC, 1e-10) == pytest.approx(plane_potential_cp(z, ALPHA0), rel=1e-8)


def test_plane_potential_vdw_limit():
    z = 1e-3 * LORENTZ.wavelength / (2 * math.pi)
    assert plane_potential(z, LORENTZ, rel_tol=1e-9) == pytest.approx(plane_potential_vdw(z, LORENTZ), rel=1e-2)


def test_plane_response_is_minus_derivative():
    z = 150e-9
    h = 1e-3 * z
    derivative = -(plane_potential(z + h, LORENTZ, 1e-11) - plane_potential(z - h, LORENTZ, 1e-11)) / (2 * h)
    assert plane_response(z, LORENTZ, 1e-10) == pytest.approx(derivative, rel=1e-4)


# Exact quadrature

def test_inner_integral_closed_form_at_zero():
    assert inner_integral(0.7, 0.0)[0] == pytest.approx(float(plane_inner(0.7)))
    total, _ = quad(lambda t: float(plane_inner(t)), 0, np.inf)
    assert total == pytest.approx(-3 * math.pi, rel=1e-10)


def test_inner_integral_continuous_at_small_wavenumber():
    value, _ = inner_integral(1.0, 1e-2)
    assert value == pytest.approx(float(plane_inner(1.0)), rel=1e-3)


def test_inner_integral_matches_polar_quadrature():
    t, kz = 0.5, 1.0

    def integrand(theta, r):
        q_in = math.sqrt(max(r * r - 2 * r * kz * math.cos(theta) + kz * kz, 0.0))
        dot = r * r - r * kz * math.cos(theta)
        return r * float(weighted_kernel_from_dot(t, r, q_in, dot))

    polar, _ = dblquad(integrand, 0.0, 40.0, 0.0, math.pi, epsabs=1e-12, epsrel=1e-9)
    value, _ = inner_integral(t, kz, rel_tol=1e-8)
    assert value == pytest.approx(2.0 * polar, rel=1e-6)


def test_response_value_accuracy_check():
    assert ResponseValue(-1.0, 1e-7).is_accurate(1e-6)
    assert not ResponseValue(-1.0, 1e-5).is_accurate(1e-6)


class TestExactQuadrature:
    """Quadrature against the closed forms on reduced acceptance grids."""

    def test_static_matches_cp_closed_form(self):
        exact = engine("exact")
        z = 100e-9
        for kz in (0.01, 0.1, 1.0, 3.0, 6.0, 10.0):
            q = ResponseQuery(kz / z, z)
            assert g_exact(q, exact) / g_cp_analytic(q, ALPHA0) == pytest.approx(1.0, abs=1e-3)

    def test_plane_response_equals_exact_at_zero_wavenumber(self):
        z = 300e-9
        exact = engine("exact", LORENTZ)
        assert g_exact(ResponseQuery(0.0, z), exact) == pytest.approx(plane_response(z, LORENTZ), rel=1e-6)

    def test_lorentz_matches_vdw_closed_form(self):
        z = 1e-3 * C_LIGHT / LORENTZ.omega_a
        exact = engine("exact", LORENTZ)
        for kz in (0.1, 1.0, 3.0, 8.0):
            q = ResponseQuery(kz / z, z)
            assert g_exact(q, exact) / g_vdw_analytic(q, LORENTZ) == pytest.approx(1.0, abs=1e-2)

    def test_exact_error_estimate_within_tolerance(self):
        value = response_integral(2e7, 100e-9, STATIC, rel_tol=1e-6, abs_tol=0.0)
        assert value.value < 0
        assert value.error <= 1e-5 * abs(value.value)


# Memo and persistent store

class TestExactCaching:
    @pytest.fixture
    def counted(self, monkeypatch):
        calls = []

        def fake(k, z, model, rel_tol, abs_tol):
            calls.append((k, z))
            return ResponseValue(-(1.0 + k * z) / z ** 5, 1e-40)

        monkeypatch.setattr(response_module, "response_integral", fake)
        return calls

    @pytest.fixture
    def store(self, tmp_path):
        database.set_db_path(str(tmp_path / "responses.db"))
        yield
        database.set_db_path(None)

    def test_memo_avoids_recomputation(self, counted):
        database.set_db_path(None)
        exact = engine("exact")
        first = exact.g(1e6, 1e-6)
        second = exact.g(1e6, 1e-6)
        assert first == second
        assert len(counted) == 1

    def test_store_shared_between_engines(self, counted, store):
        engine("exact").g(2e6, 1e-6)
        again = engine("exact").evaluate(2e6, 1e-6)
        assert len(counted) == 1
        assert again.error == 1e-40

    def test_store_keyed_by_tolerance(self, counted, store):
        engine("exact", rel_tol=1e-6).g(2e6, 1e-6)
        engine("exact", rel_tol=1e-7).g(2e6, 1e-6)
        assert len(counted) == 2
