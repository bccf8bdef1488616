#!/usr/bin/env python3
"""Test polarizability models, constants and tabulated loading."""

import logging
import math
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest
from scipy.integrate import quad

from core.constants import C_LIGHT, CONSTANTS, EPS0, HBAR
from core.errors import ConfigError, DivergenceError, RangeError
from core.polarizability import (
    LorentzPolarizability,
    StaticPolarizability,
    TabulatedPolarizability,
    alpha_at,
    alpha_from_volume,
    integrated_alpha,
    load_tabulated_csv,
)

RB_ALPHA0 = alpha_from_volume(47.3e-30)


def test_constants_are_codata():
    assert HBAR == pytest.approx(1.054571817e-34, rel=1e-9)
    assert C_LIGHT == 299792458.0
    assert EPS0 == pytest.approx(8.8541878128e-12, rel=1e-9)
    assert CONSTANTS.c == C_LIGHT


def test_alpha_from_volume():
    assert alpha_from_volume(1.0) == EPS0
    assert RB_ALPHA0 == pytest.approx(47.3e-30 * EPS0)


def test_static_model():
    model = StaticPolarizability(RB_ALPHA0)
    assert alpha_at(model, 0.0) == RB_ALPHA0
    assert alpha_at(model, 1e16) == RB_ALPHA0
    values = alpha_at(model, np.array([0.0, 1.0, 2.0]))
    assert values.shape == (3,)
    assert model.characteristic_frequency is None
    with pytest.raises(DivergenceError):
        integrated_alpha(model)


def test_static_model_rejects_bad_input():
    with pytest.raises(ConfigError):
        StaticPolarizability(0.0)
    with pytest.raises(RangeError):
        StaticPolarizability(RB_ALPHA0).alpha_at(-1.0)


def test_lorentz_model():
    omega = 2.4e15
    model = LorentzPolarizability(RB_ALPHA0, omega)
    assert alpha_at(model, 0.0) == RB_ALPHA0
    assert alpha_at(model, omega) == pytest.approx(0.5 * RB_ALPHA0)
    assert model.static_alpha == RB_ALPHA0
    assert model.characteristic_frequency == omega


def test_lorentz_integral_matches_quadrature():
    model = LorentzPolarizability(RB_ALPHA0, 2.4e15)
    numeric, _ = quad(lambda x: model.alpha_at(x * model.omega_a), 0, np.inf)
    assert integrated_alpha(model) == pytest.approx(numeric * model.omega_a, rel=1e-8)
    assert integrated_alpha(model) == pytest.approx(0.5 * math.pi * RB_ALPHA0 * 2.4e15)


def test_lorentz_from_wavelength():
    model = LorentzPolarizability.from_wavelength(RB_ALPHA0, 780e-9)
    assert model.omega_a == pytest.approx(2 * math.pi * C_LIGHT / 780e-9)
    assert model.wavelength == pytest.approx(780e-9)
    with pytest.raises(ConfigError):
        LorentzPolarizability.from_wavelength(RB_ALPHA0, -1.0)


def test_tabulated_interpolation():
    xi = np.array([0.0, 1e15, 2e15, 4e15])
    alpha = RB_ALPHA0 * np.array([1.0, 0.5, 0.25, 0.0625])
    model = TabulatedPolarizability(xi, alpha)
    assert model.static_alpha == RB_ALPHA0
    assert alpha_at(model, 1e15) == pytest.approx(0.5 * RB_ALPHA0)
    # log-linear between nodes
    assert alpha_at(model, 0.5e15) == pytest.approx(RB_ALPHA0 * math.sqrt(0.5))
    with pytest.raises(RangeError):
        model.alpha_at(5e15)


def test_tabulated_integral_is_exact_for_interpolant():
    xi = np.array([0.0, 1e15, 3e15])
    alpha = RB_ALPHA0 * np.array([1.0, 0.6, 0.1])
    model = TabulatedPolarizability(xi, alpha)
    numeric, _ = quad(lambda x: model.alpha_at(x) / RB_ALPHA0, 0.0, 3e15, points=[1e15], epsrel=1e-12)
    assert integrated_alpha(model) == pytest.approx(numeric * RB_ALPHA0, rel=1e-9)


def test_dense_lorentz_table_integral(caplog):
    xi = np.concatenate(([0.0], np.logspace(-4, 7, 60001)))
    model = TabulatedPolarizability(xi, 1.0 / (1.0 + xi ** 2))
    with caplog.at_level(logging.WARNING, logger="core.polarizability"):
        assert integrated_alpha(model) == pytest.approx(0.5 * math.pi, abs=1e-6)
    assert not caplog.records


def test_short_table_warns_about_missing_tail(caplog):
    xi = np.linspace(0.0, 10.0, 20001)
    model = TabulatedPolarizability(xi, 1.0 / (1.0 + xi ** 2))
    with caplog.at_level(logging.WARNING, logger="core.polarizability"):
        value = integrated_alpha(model)
    assert value == pytest.approx(math.atan(10.0), rel=1e-6)
    assert any("misses" in r.message for r in caplog.records)


@pytest.mark.parametrize(
    "xi, alpha",
    [
        ([0.0, 1.0, 1.0], [3.0, 2.0, 1.0]),
        ([0.0, 1.0], [1.0, 2.0]),
        ([0.0, 1.0], [1.0, -1.0]),
        ([0.0], [1.0]),
    ],
)
def test_tabulated_validation(xi, alpha):
    with pytest.raises(ConfigError):
        TabulatedPolarizability(np.array(xi), np.array(alpha))


def test_tabulated_fingerprint_depends_on_values():
    a = TabulatedPolarizability(np.array([0.0, 1.0]), np.array([2.0, 1.0]))
    b = TabulatedPolarizability(np.array([0.0, 1.0]), np.array([2.0, 0.5]))
    assert a.fingerprint() != b.fingerprint()
    assert a.fingerprint() == TabulatedPolarizability(np.array([0.0, 1.0]), np.array([2.0, 1.0])).fingerprint()


def test_load_tabulated_csv(tmp_path):
    path = tmp_path / "alpha.csv"
    path.write_text("xi_rad_per_s,alpha_si\n0,4e-39\n1e15,2e-39\n2e15,1e-39\n")
    model = load_tabulated_csv(path)
    assert model.xi_range == (0.0, 2e15)
    assert model.static_alpha == 4e-39


def test_load_tabulated_csv_requires_header(tmp_path):
    path = tmp_path / "alpha.csv"
    path.write_text("0,4e-39\n1e15,2e-39\n")
    with pytest.raises(ConfigError):
        load_tabulated_csv(path)


def test_load_tabulated_csv_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_tabulated_csv(tmp_path / "missing.csv")
