"""
Per-run parameters for the command-line front end.

A run is described by a plain key=value file (read with python-dotenv) plus
command-line overrides, which win. Lengths must carry a unit suffix (nm, um or
m); α(0)/ε₀ is given in m³. Unknown keys are rejected.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Union

import numpy as np
from dotenv import dotenv_values

from core.config import config
from core.errors import ConfigError, DivergenceError
from core.polarizability import (
    LorentzPolarizability,
    PolarizabilityModel,
    StaticPolarizability,
    alpha_from_volume,
    load_tabulated_csv,
)
from physics.bec import BecConfig
from physics.corrugation import CorrugationProfile, FourierSeries, Sinusoid, VGrooves, load_fourier_csv
from physics.response import ResponseEngine, ResponseMethod

logger = logging.getLogger(__name__)

LENGTH_UNITS = {"nm": 1e-9, "um": 1e-6, "μm": 1e-6, "m": 1.0}
_LENGTH_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(nm|um|μm|m)\s*$")

MATERIALS = ("perfect-conductor",)
POLARIZABILITIES = ("static", "lorentz", "tabulated")
PROFILES = ("sinusoid", "vgrooves", "fourier")
FORMATS = ("csv", "json")

# Rubidium ground state
RB_MASS = 1.45e-25
RB_ALPHA0_OVER_EPS0 = 47.3e-30


def parse_length(raw: str) -> float:
    """'250 nm' -> 2.5e-7. A unit suffix is mandatory."""
    match = _LENGTH_RE.match(raw)
    if match is None:
        raise ConfigError(f"length {raw!r} needs a number with a unit suffix (nm, um or m)")
    return float(match.group(1)) * LENGTH_UNITS[match.group(2)]


def parse_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError as e:
        raise ConfigError(f"expected a number, got {raw!r}") from e
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {raw!r}")
    return value


def parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"expected an integer, got {raw!r}") from e


def parse_grid(raw: str) -> list[float]:
    """
    Dimensionless grid in one of three forms.

    - '0.1, 1, 3.55': explicit values
    - '0:10:101': start:stop:count, linear
    - 'log:0.01:10:20': logarithmic
    """
    text = raw.strip()
    parts = [p.strip() for p in text.split(":")]
    if len(parts) == 4 and parts[0] == "log":
        start, stop, count = parse_float(parts[1]), parse_float(parts[2]), parse_int(parts[3])
        if not (0 < start and 0 < stop and count >= 1):
            raise ConfigError(f"log grid {raw!r} needs positive bounds and count")
        return [float(v) for v in np.geomspace(start, stop, count)]
    if len(parts) == 3:
        start, stop, count = parse_float(parts[0]), parse_float(parts[1]), parse_int(parts[2])
        if count < 1:
            raise ConfigError(f"grid {raw!r} needs a positive count")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [parse_float(p) for p in _split_list(text)]


def parse_length_list(raw: str) -> list[float]:
    return [parse_length(p) for p in _split_list(raw)]


def parse_methods(raw: str) -> list[ResponseMethod]:
    return [ResponseMethod.parse(p) for p in _split_list(raw)]


def _split_list(raw: str) -> list[str]:
    items = [p.strip() for p in raw.split(",") if p.strip()]
    if not items:
        raise ConfigError("empty list")
    return items


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(raw: str) -> str:
        value = raw.strip().lower()
        if value not in options:
            raise ConfigError(f"{raw!r} is not one of: {', '.join(options)}")
        return value

    return parse


def _text(raw: str) -> str:
    return raw.strip()


PARSERS: dict[str, Callable[[str], Any]] = {
    "material": _choice(MATERIALS),
    "polarizability": _choice(POLARIZABILITIES),
    "alpha0_over_eps0": parse_float,
    "omega_a": parse_float,
    "lambda_a": parse_length,
    "alpha_table": _text,
    "profile": _choice(PROFILES),
    "h0": parse_length,
    "a": parse_length,
    "s": parse_length,
    "s_fraction": parse_float,
    "lambda_c": parse_length,
    "fourier_table": _text,
    "n_max": parse_int,
    "z_a": parse_length_list,
    "kz": parse_grid,
    "x_points": parse_int,
    "mass": parse_float,
    "trap_frequency_hz": parse_float,
    "z_cm": parse_length,
    "tf_radii": parse_length_list,
    "methods": parse_methods,
    "exact_method": ResponseMethod.parse,
    "rel_tol": parse_float,
    "abs_tol": parse_float,
    "threads": parse_int,
    "format": _choice(FORMATS),
    "out": _text,
}


@dataclass
class RunConfig:
    """
    Parameters of one CLI run, all in SI units.

    Profile-specific keys (h0 for a sinusoid, fourier_table for a Fourier
    profile) are required only by the profile that uses them.
    """

    material: str = "perfect-conductor"
    polarizability: str = "static"
    alpha0_over_eps0: float = RB_ALPHA0_OVER_EPS0
    omega_a: Optional[float] = None
    lambda_a: Optional[float] = None
    alpha_table: Optional[str] = None
    profile: str = "vgrooves"
    h0: Optional[float] = None
    a: float = 250e-9
    s: Optional[float] = None
    s_fraction: float = 0.5
    lambda_c: float = 4e-6
    fourier_table: Optional[str] = None
    n_max: int = field(default_factory=lambda: config.n_max)
    z_a: list[float] = field(default_factory=lambda: [1e-6])
    kz: list[float] = field(default_factory=lambda: [float(v) for v in np.linspace(0.5, 10.0, 20)])
    x_points: int = 101
    mass: float = RB_MASS
    trap_frequency_hz: float = 229.0
    z_cm: float = 2e-6
    tf_radii: list[float] = field(default_factory=lambda: [0.0])
    methods: list[ResponseMethod] = field(
        default_factory=lambda: [ResponseMethod.ANALYTIC_CP, ResponseMethod.PWS, ResponseMethod.PFA]
    )
    exact_method: ResponseMethod = ResponseMethod.EXACT
    rel_tol: float = field(default_factory=lambda: config.rel_tol)
    abs_tol: float = field(default_factory=lambda: config.abs_tol)
    threads: int = field(default_factory=lambda: config.threads)
    format: str = "csv"
    out: Optional[str] = None
    base_dir: Path = field(default_factory=Path.cwd, repr=False, compare=False)

    def __post_init__(self):
        self._validate()

    def _validate(self):
        errors = []
        positive = {
            "alpha0_over_eps0": self.alpha0_over_eps0,
            "a": self.a,
            "lambda_c": self.lambda_c,
            "mass": self.mass,
            "trap_frequency_hz": self.trap_frequency_hz,
            "z_cm": self.z_cm,
            "rel_tol": self.rel_tol,
        }
        for name in ("omega_a", "lambda_a", "h0", "s"):
            if getattr(self, name) is not None:
                positive[name] = getattr(self, name)
        errors += [f"{name} must be positive, got {value}" for name, value in positive.items() if not value > 0]

        if not 0 < self.s_fraction < 1:
            errors.append(f"s_fraction must lie in (0, 1), got {self.s_fraction}")
        if not self.rel_tol < 1:
            errors.append(f"rel_tol must be below 1, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            errors.append(f"abs_tol must be non-negative, got {self.abs_tol}")
        if self.threads < 1:
            errors.append(f"threads must be at least 1, got {self.threads}")
        if self.n_max < 1:
            errors.append(f"n_max must be at least 1, got {self.n_max}")
        if self.x_points < 2:
            errors.append(f"x_points must be at least 2, got {self.x_points}")
        if not self.z_a or any(not z > 0 for z in self.z_a):
            errors.append("z_a must list positive heights")
        if not self.kz or any(not k >= 0 for k in self.kz):
            errors.append("kz values must be non-negative")
        if any(not r >= 0 for r in self.tf_radii):
            errors.append("tf_radii must be non-negative")
        if not self.methods:
            errors.append("methods must not be empty")

        if self.polarizability == "lorentz" and (self.omega_a is None) == (self.lambda_a is None):
            errors.append("a Lorentz polarizability needs exactly one of omega_a or lambda_a")
        if self.polarizability == "tabulated" and not self.alpha_table:
            errors.append("a tabulated polarizability needs alpha_table")
        if self.profile == "sinusoid" and self.h0 is None:
            errors.append("a sinusoid profile needs h0")
        if self.profile == "fourier" and not self.fourier_table:
            errors.append("a Fourier profile needs fourier_table")

        if errors:
            raise ConfigError("Invalid run configuration:\n" + "\n".join(f"  - {e}" for e in errors))

    @property
    def groove_width(self) -> float:
        return self.s if self.s is not None else self.s_fraction * self.lambda_c

    def resolve(self, path: Optional[str]) -> Optional[Path]:
        if not path:
            return None
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def as_metadata(self) -> dict[str, Any]:
        """JSON-safe echo of every parameter."""
        data = asdict(self)
        data.pop("base_dir")
        data["methods"] = [m.value for m in self.methods]
        data["exact_method"] = self.exact_method.value
        return data


def read_config_file(path: Union[str, Path]) -> dict[str, str]:
    """Raw key=value pairs of a run file; comments and blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = dotenv_values(path)
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigError(f"{path}: keys without a value: {', '.join(missing)}")
    return {key.strip().lower(): value for key, value in values.items()}


def parse_overrides(pairs: Optional[list[str]]) -> dict[str, str]:
    """['a=250nm', ...] -> {'a': '250nm'}."""
    out: dict[str, str] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} must look like KEY=VALUE")
        key, value = pair.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Build a RunConfig from defaults, a key=value file and overrides.

    Relative file paths inside the config file resolve against its directory.

    Raises:
        ConfigError: unknown keys, malformed values or violated invariants
    """
    raw: dict[str, str] = {}
    base_dir = Path.cwd()
    if path is not None:
        raw.update(read_config_file(path))
        base_dir = Path(path).resolve().parent
    raw.update(overrides or {})

    unknown = sorted(set(raw) - set(PARSERS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    values: dict[str, Any] = {}
    errors = []
    for key, text in raw.items():
        try:
            values[key] = PARSERS[key](text)
        except ConfigError as e:
            errors.append(f"{key}: {e}")
    if errors:
        raise ConfigError("Invalid run configuration:\n" + "\n".join(f"  - {e}" for e in errors))

    run = RunConfig(base_dir=base_dir, **values)
    logger.info(f"Run configuration loaded ({len(raw)} keys set)")
    return run


def build_model(run: RunConfig) -> PolarizabilityModel:
    """Polarizability model described by the run."""
    alpha0 = alpha_from_volume(run.alpha0_over_eps0)
    if run.polarizability == "static":
        return StaticPolarizability(alpha0)
    if run.polarizability == "lorentz":
        if run.lambda_a is not None:
            return LorentzPolarizability.from_wavelength(alpha0, run.lambda_a)
        return LorentzPolarizability(alpha0, run.omega_a)
    return load_tabulated_csv(run.resolve(run.alpha_table))


def build_profile(run: RunConfig, lambda_c: Optional[float] = None) -> CorrugationProfile:
    """Surface profile described by the run, optionally with a different period."""
    period = lambda_c or run.lambda_c
    if run.profile == "sinusoid":
        return Sinusoid(h0=run.h0, lambda_c=period)
    if run.profile == "vgrooves":
        width = run.s_fraction * period if lambda_c is not None and run.s is None else run.groove_width
        return VGrooves(a=run.a, s=width, lambda_c=period, n_max=run.n_max)
    series = load_fourier_csv(run.resolve(run.fourier_table), period)
    return FourierSeries(lambda_c=period, values=series.values[: run.n_max + 1])


def build_engine(run: RunConfig, method: ResponseMethod, model: Optional[PolarizabilityModel] = None) -> ResponseEngine:
    """Response engine for one method with the run's tolerances."""
    model = model or build_model(run)
    reference = run.exact_method if run.exact_method is not ResponseMethod.PFA else ResponseMethod.ANALYTIC_CP
    try:
        return ResponseEngine(method, model, rel_tol=run.rel_tol, abs_tol=run.abs_tol, pfa_reference=reference)
    except DivergenceError as e:
        raise ConfigError(f"method {method.value} cannot be used with polarizability={run.polarizability}: {e}") from e


def build_engines(run: RunConfig, methods: list[ResponseMethod]) -> dict[ResponseMethod, ResponseEngine]:
    """One engine per distinct method, sharing one polarizability model."""
    model = build_model(run)
    engines: dict[ResponseMethod, ResponseEngine] = {}
    for method in methods:
        if method not in engines:
            engines[method] = build_engine(run, method, model)
    return engines


def build_bec(run: RunConfig, tf_radius: float = 0.0) -> BecConfig:
    return BecConfig.from_frequency_hz(run.mass, run.trap_frequency_hz, tf_radius, run.z_cm)
