#!/usr/bin/env python3
"""Test the command-line front end end to end, in process."""

import json
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))

import pytest

import lateral_cp
from core import __version__
from core.errors import AccuracyError, ConfigError, SurfaceContactError
from tools.scan import COLUMNS, ScanResult

FAST_FIGURES = {
    "fig1": ["--param", "kz=0:10:11"],
    "fig3": ["--param", "kz=1,3.55", "--param", "x_points=9"],
    "fig4": ["--param", "kz=3,4,5", "--param", "tf_radii=0um,0.5um"],
}


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = lateral_cp.main([*args, "--out", str(out)])
    return code, out


def test_response_csv(tmp_path):
    code, out = run(
        tmp_path, "response",
        "--param", "z_a=1um", "--param", "kz=0.5,3.55", "--param", "exact_method=analytic-cp",
        "--method", "analytic-cp,pws",
    )
    assert code == 0
    result = ScanResult.from_csv(out.read_text())
    assert [row.quantity for row in result.rows[:4]] == ["g", "g", "rho_pfa", "rho_pws"]
    assert len(result.rows) == 8
    g_cp = result.values("g", method="analytic-cp")
    assert len(g_cp) == 2 and all(v < 0 for v in g_cp)
    assert result.values("rho_pws", kz=3.55) == [pytest.approx(1.146, abs=0.01)]


def test_csv_header_and_reload(tmp_path):
    code, out = run(tmp_path, "ratios", "--param", "kz=1,2", "--method", "analytic-cp")
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(COLUMNS)
    assert ScanResult.from_csv(text).to_csv() == text


def test_json_metadata(tmp_path):
    code, out = run(tmp_path, "potential", "--param", "z_a=1um,2um", "--param", "x_points=5", "--format", "json", name="out.json")
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["command"] == "potential"
    assert payload["metadata"]["version"] == __version__
    assert payload["metadata"]["config"]["x_points"] == 5
    assert len(payload["rows"]) == 2 * 5 * 3
    reloaded = ScanResult.from_json(out.read_text())
    assert len(reloaded.rows) == 30


def test_force_rows(tmp_path):
    code, out = run(tmp_path, "force", "--param", "x_points=5", "--method", "pfa")
    assert code == 0
    result = ScanResult.from_csv(out.read_text())
    forces = result.values("force", method="pfa")
    assert len(forces) == 5
    assert forces[2] == 0.0


def test_bec_shift_includes_single_atom(tmp_path):
    code, out = run(tmp_path, "bec-shift", "--param", "tf_radii=0.5um", "--param", "lambda_c=2um", "--method", "analytic-cp")
    assert code == 0
    result = ScanResult.from_csv(out.read_text())
    assert [row.tf_radius_m for row in result.rows] == [0.0, 0.5e-6]
    assert all(v > 0 for v in result.values("gamma"))


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        lateral_cp.main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


class TestExitCodes:
    def test_unknown_key(self, tmp_path):
        code, out = run(tmp_path, "response", "--param", "depth=1nm")
        assert code == 2
        assert not out.exists()

    def test_missing_unit(self, tmp_path):
        code, _ = run(tmp_path, "response", "--param", "z_a=1")
        assert code == 2

    def test_unknown_method(self, tmp_path):
        code, _ = run(tmp_path, "response", "--method", "magic")
        assert code == 2

    def test_vdw_method_with_static_model(self, tmp_path):
        code, out = run(tmp_path, "response", "--method", "analytic-vdw")
        assert code == 2
        assert not out.exists()

    def test_surface_contact_rows_written(self, tmp_path):
        code, out = run(
            tmp_path, "bec-shift", "--param", "z_cm=0.3um", "--param", "tf_radii=0.1um", "--method", "analytic-cp"
        )
        assert code == 2
        result = ScanResult.from_csv(out.read_text())
        assert result.rows[0].value is not None and not result.rows[0].flagged
        assert result.rows[1].flagged
        assert SurfaceContactError.__name__ in result.rows[1].message

    def test_unreachable_tolerance(self, tmp_path):
        code, out = run(tmp_path, "response", "--method", "exact", "--rel-tol", "1e-16", "--param", "kz=1")
        assert code == 3
        result = ScanResult.from_csv(out.read_text())
        assert result.rows and result.rows[0].flagged
        assert AccuracyError.__name__ in result.rows[0].message

    def test_exit_code_mapping(self):
        assert lateral_cp.exit_code_for([]) == 0
        assert lateral_cp.exit_code_for([AccuracyError("x")]) == 3
        assert lateral_cp.exit_code_for([AccuracyError("x"), ConfigError("y")]) == 2


@pytest.mark.parametrize("figure", sorted(FAST_FIGURES))
def test_figures_independent_of_thread_count(tmp_path, figure):
    outputs = []
    for threads in (1, 4, 8):
        code, out = run(tmp_path, figure, "--threads", str(threads), *FAST_FIGURES[figure], name=f"{figure}-{threads}.csv")
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    assert len(ScanResult.from_csv(outputs[0].decode()).rows) > 0


def test_fig4_columns(tmp_path):
    code, out = run(tmp_path, "fig4", *FAST_FIGURES["fig4"])
    assert code == 0
    result = ScanResult.from_csv(out.read_text())
    assert {row.method for row in result.rows} == {"analytic-cp", "pws", "pfa"}
    assert result.values("gamma", method="pfa", tf_radius_m=0.0) == [0.0, 0.0, 0.0]
    exact = result.values("gamma", method="analytic-cp", tf_radius_m=0.0)
    wider = result.values("gamma", method="analytic-cp", tf_radius_m=0.5e-6)
    assert all(w > e for e, w in zip(exact, wider))


def test_fig1_ratios_start_at_one(tmp_path):
    code, out = run(tmp_path, "fig1", *FAST_FIGURES["fig1"])
    assert code == 0
    result = ScanResult.from_csv(out.read_text())
    assert result.values("rho_pfa", method="analytic-vdw", kz=0.0) == [1.0]
    assert result.values("rho_pws", method="analytic-cp", kz=0.0) == [1.0]
