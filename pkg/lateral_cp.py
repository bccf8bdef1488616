"""
Command-line front end for lateral Casimir-Polder calculations.

Every subcommand reads a key=value run file (--config) plus overrides and
writes one ScanResult as CSV or JSON. Exit codes: 0 success, 2 configuration
error, 3 numerical failure. Rows computed before a failure are still written.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from core import __version__
from core.config import config
from core.errors import ConfigError, LateralCPError
from physics.bec import fig4_scan, gamma_scan
from physics.corrugation import check_small_amplitude, lateral_force, lateral_potential
from physics.response import ResponseEngine, ResponseMethod, ResponseQuery, rho_pfa, rho_pws
from tools.run_config import (
    RunConfig,
    build_bec,
    build_engines,
    build_profile,
    load_run_config,
    parse_overrides,
)
from tools.scan import ScanResult, ScanRow, error_row, flag_inaccurate, guarded, run_points

logger = logging.getLogger(__name__)

FIGURES_DIR = Path(__file__).resolve().parent / "figures"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# ==========================================================
# RESPONSE AND RATIOS
# ==========================================================

def _value_row(index: int, engine: ResponseEngine, k: float, z: float, **inputs) -> ScanRow:
    def evaluate():
        result = engine.evaluate(k, z)
        return result.value, result.error

    row = guarded(index, engine.label, "g", evaluate, **inputs)
    return flag_inaccurate(row, engine.rel_tol, engine.abs_tol)


def _ratio_rows(index: int, engine: ResponseEngine, q: ResponseQuery, with_pws: bool, **inputs) -> list[ScanRow]:
    rows = [guarded(index, engine.label, "rho_pfa", lambda: rho_pfa(q, engine), **inputs)]
    if with_pws:
        rows.append(guarded(index, engine.label, "rho_pws", lambda: rho_pws(q, engine), **inputs))
    return rows


def cmd_response(run: RunConfig) -> ScanResult:
    """g for each requested method plus ρ_PFA and ρ_PWS of the reference method, over z_a × kz."""
    engines = build_engines(run, [*run.methods, run.exact_method])
    reference = engines[run.exact_method]
    points = [(z, kz) for z in run.z_a for kz in run.kz]

    def compute(index: int, point: tuple[float, float]) -> list[ScanRow]:
        z, kz = point
        k = kz / z
        inputs = dict(k_rad_per_m=k, z_m=z, kz=kz)
        rows = [_value_row(index, engines[m], k, z, **inputs) for m in run.methods]
        with_pws = reference.method is not ResponseMethod.ANALYTIC_VDW
        rows += _ratio_rows(index, reference, ResponseQuery(k, z), with_pws, **inputs)
        return rows

    return ScanResult("response", run_points(compute, points, run.threads, "response"))


def cmd_ratios(run: RunConfig) -> ScanResult:
    """ρ_PFA and ρ_PWS for each requested method over z_a × kz."""
    methods = [m for m in run.methods if m is not ResponseMethod.PFA]
    if not methods:
        raise ConfigError("ratios need at least one method other than pfa")
    engines = build_engines(run, methods)
    points = [(z, kz) for z in run.z_a for kz in run.kz]

    def compute(index: int, point: tuple[float, float]) -> list[ScanRow]:
        z, kz = point
        q = ResponseQuery(kz / z, z)
        inputs = dict(k_rad_per_m=q.k, z_m=z, kz=kz)
        rows = []
        for m in methods:
            rows += _ratio_rows(index, engines[m], q, m is not ResponseMethod.ANALYTIC_VDW, **inputs)
        return rows

    return ScanResult("ratios", run_points(compute, points, run.threads, "ratios"))


# ==========================================================
# LATERAL POTENTIAL AND FORCE
# ==========================================================

def _period_samples(lambda_c: float, count: int) -> np.ndarray:
    return np.linspace(-0.5 * lambda_c, 0.5 * lambda_c, count)


def _profile_scan(
    run: RunConfig,
    command: str,
    quantity: str,
    evaluate: Callable,
    heights: Sequence[tuple[float, float]],
    methods: Sequence[ResponseMethod],
) -> ScanResult:
    """Rows of evaluate(profile, xs, z, engine) for every height, x sample and method."""
    profile = build_profile(run)
    engines = build_engines(run, list(methods))
    xs = _period_samples(profile.lambda_c, run.x_points)

    def compute(index: int, point: tuple[float, float]) -> list[ScanRow]:
        z, kz = point
        check_small_amplitude(profile, z)
        rows = []
        for m in methods:
            engine = engines[m]
            base = index * xs.size
            try:
                values = np.atleast_1d(evaluate(profile, xs, z, engine))
            except LateralCPError as e:
                logger.warning(f"{command} at z={z:.3e} with {engine.label} failed: {e}")
                rows += [
                    error_row(base + i, engine.label, quantity, e, k_rad_per_m=profile.kc, z_m=z, kz=kz, x_m=float(x))
                    for i, x in enumerate(xs)
                ]
                continue
            rows += [
                ScanRow(
                    point=base + i,
                    method=engine.label,
                    quantity=quantity,
                    value=float(v),
                    k_rad_per_m=profile.kc,
                    z_m=z,
                    kz=kz,
                    x_m=float(x),
                )
                for i, (x, v) in enumerate(zip(xs, values))
            ]
        return rows

    return ScanResult(command, run_points(compute, heights, run.threads, command))


def _heights(run: RunConfig) -> list[tuple[float, float]]:
    kc = 2.0 * math.pi / run.lambda_c
    return [(z, kc * z) for z in run.z_a]


def cmd_potential(run: RunConfig) -> ScanResult:
    """U⁽¹⁾ over one period at each height."""
    return _profile_scan(run, "potential", "u1", lateral_potential, _heights(run), run.methods)


def cmd_force(run: RunConfig) -> ScanResult:
    """Lateral force over one period at each height."""
    return _profile_scan(run, "force", "force", lateral_force, _heights(run), run.methods)


# ==========================================================
# CONDENSATE
# ==========================================================

def cmd_bec_shift(run: RunConfig) -> ScanResult:
    """γ for the single atom and every configured Thomas-Fermi radius."""
    radii = sorted({0.0, *run.tf_radii})
    engines = build_engines(run, run.methods)
    profile = build_profile(run)
    return gamma_scan(profile, build_bec(run), list(engines.values()), radii=radii, threads=run.threads)


# ==========================================================
# FIGURES
# ==========================================================

def cmd_fig1(run: RunConfig) -> ScanResult:
    """ρ_PFA in the vdW and CP regimes and ρ_PWS in the CP regime versus k·zA."""
    cp_method = run.exact_method
    engines = build_engines(run, [ResponseMethod.ANALYTIC_VDW, cp_method])
    vdw, cp = engines[ResponseMethod.ANALYTIC_VDW], engines[cp_method]
    z = run.z_a[0]

    def compute(index: int, kz: float) -> list[ScanRow]:
        q = ResponseQuery(kz / z, z)
        inputs = dict(k_rad_per_m=q.k, z_m=z, kz=kz)
        return _ratio_rows(index, vdw, q, False, **inputs) + _ratio_rows(index, cp, q, True, **inputs)

    return ScanResult("fig1", run_points(compute, run.kz, run.threads, "fig1"))


def cmd_fig3(run: RunConfig) -> ScanResult:
    """U⁽¹⁾ over one groove period for each kc·zA, by the exact, PFA and PWS methods."""
    if run.profile != "vgrooves":
        raise ConfigError("fig3 needs profile = vgrooves")
    kc = 2.0 * math.pi / run.lambda_c
    heights = [(kz / kc, kz) for kz in run.kz if kz > 0]
    if len(heights) != len(run.kz):
        raise ConfigError("fig3 needs positive kz values")
    methods = [run.exact_method, ResponseMethod.PFA, ResponseMethod.PWS]
    return _profile_scan(run, "fig3", "u1", lateral_potential, heights, methods)


def cmd_fig4(run: RunConfig) -> ScanResult:
    """γ versus kc·zCM for every Thomas-Fermi radius, by the exact, PWS and PFA methods."""
    methods = [run.exact_method, ResponseMethod.PWS, ResponseMethod.PFA]
    engines = build_engines(run, methods)
    radii = sorted({*run.tf_radii})
    kcz = list(run.kz)
    if any(v <= 0 for v in kcz):
        raise ConfigError("fig4 needs positive kz values")
    return fig4_scan(
        kcz,
        radii,
        build_bec(run),
        run.a,
        list(engines.values()),
        s_fraction=run.s_fraction,
        threads=run.threads,
        n_max=run.n_max,
    )


COMMANDS: dict[str, tuple[Callable[[RunConfig], ScanResult], str]] = {
    "response": (cmd_response, "response function g(k, zA) and deviation ratios"),
    "ratios": (cmd_ratios, "deviation ratios rho_PFA and rho_PWS"),
    "potential": (cmd_potential, "lateral potential over one corrugation period"),
    "force": (cmd_force, "lateral force over one corrugation period"),
    "bec-shift": (cmd_bec_shift, "relative dipole-frequency shift of a trapped condensate"),
    "fig1": (cmd_fig1, "deviation ratios versus k*zA for a sinusoidal corrugation"),
    "fig3": (cmd_fig3, "lateral potential above a grooved surface"),
    "fig4": (cmd_fig4, "condensate frequency shift versus kc*zCM"),
}


# ==========================================================
# ENTRYPOINT
# ==========================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lateral-cp", description="Lateral Casimir-Polder calculator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key=value run file")
        p.add_argument("--out", default=None, help="output path (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--method", default=None, help="comma-separated methods")
        p.add_argument("--rel-tol", default=None)
        p.add_argument("--threads", default=None)
        p.add_argument(
            "--param", action="append", default=[], metavar="KEY=VALUE",
            help="override one run key (repeatable, wins over --config)",
        )
        p.add_argument("--log-level", default=None, choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    path = args.config
    if path is None and args.command.startswith("fig"):
        path = FIGURES_DIR / f"{args.command}.conf"
    overrides = parse_overrides(args.param)
    for key, value in (
        ("out", args.out),
        ("format", args.format),
        ("methods", args.method),
        ("rel_tol", args.rel_tol),
        ("threads", args.threads),
    ):
        if value is not None:
            overrides[key] = value
    return load_run_config(path, overrides)


def exit_code_for(failures: Sequence[LateralCPError]) -> int:
    if any(isinstance(f, ConfigError) for f in failures):
        return EXIT_CONFIG
    if failures:
        return EXIT_NUMERICAL
    return EXIT_OK


def _metadata(run: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "config": run.as_metadata(),
        "rel_tol": run.rel_tol,
        "abs_tol": run.abs_tol,
        "version": __version__,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        level = args.log_level or config.log_level
    except ConfigError as e:
        print(f"lateral-cp: {e}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )

    command, _ = COMMANDS[args.command]
    try:
        run = _run_config(args)
        result = command(run)
    except ConfigError as e:
        print(f"lateral-cp: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except LateralCPError as e:
        print(f"lateral-cp: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    result.metadata = _metadata(run, args.command)
    out = Path(run.out) if run.out else None
    result.write(out, run.format, stream=sys.stdout)

    failures = result.failures
    if failures:
        print(f"lateral-cp: {len(failures)} point(s) failed; first: {failures[0]}", file=sys.stderr)
    if result.flagged:
        logger.warning(f"{len(result.flagged)} row(s) flagged")
    return exit_code_for(failures)


if __name__ == "__main__":
    sys.exit(main())
