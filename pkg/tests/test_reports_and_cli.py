import json
import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import qmahg_cli
from qmahg.errors import ValidationError
from qmahg.models import GridSpec, RunSettings
from qmahg.services import suites
from qmahg.services.reports import (
    as_real,
    build_report,
    canonical_json,
    dumps_report,
    inputs_digest,
    make_check,
    report_payload,
    validate_report,
)
from qmahg.services.suites import SUITE_NAMES, run_suite

SQUARES = "x1^2+x2^2+x3^2+x4^2"


@pytest.fixture
def settings():
    return RunSettings(n=1, mode="rational", seed=3, tol=1e-8)


# ================================
# Reports
# ================================


def test_canonical_json_sorts_keys_and_keeps_fractions():
    assert canonical_json({"b": 1, "a": Fraction(1, 2)}) == '{"a":"1/2","b":1}'
    assert inputs_digest({"b": 1, "a": 2}) == inputs_digest({"a": 2, "b": 1})
    assert len(inputs_digest({})) == 16


def test_make_check_uses_relative_residual():
    check = make_check("close", "a = b", {}, 1.0, 1.0 + 1e-10, 1e-8)
    assert check.passed and check.residual < 1e-9
    far = make_check("far", "a = b", {}, 1.0, 2.0, 1e-8)
    assert not far.passed
    with pytest.raises(ValidationError):
        as_real(1 + 1j)
    assert as_real(complex(2.0, 1e-15)) == 2.0


def test_report_schema():
    checks = [make_check("one", "1 = 1", {"k": 1}, 1, 1, 0.0),
              make_check("inf", "x = x", {}, float("inf"), 0.0, 1.0, residual=float("inf"), passed=False)]
    report = build_report("unit", checks, seed=3, n=1, mode="float", elapsed_ms=1.23456)
    payload = json.loads(dumps_report(report))
    assert validate_report(payload) == []
    assert payload["elapsed_ms"] == 1.235
    assert report_payload(report)["checks"][1]["lhs"] == "inf"
    assert not report.passed
    assert validate_report({"suite": "x"})
    broken = dict(payload, mode="complex", checks=[{"name": "x"}])
    problems = validate_report(broken)
    assert any("mode" in p for p in problems)
    assert any("lacks" in p for p in problems)


# ================================
# Suites
# ================================


def test_brackets_suite_passes(settings):
    checks = run_suite("brackets", settings, samples=2)
    assert {c.name for c in checks} >= {"frame brackets", "Z bracket value", "bracket action"}
    assert all(c.passed for c in checks)


def test_measures_suite_runs_twenty_superadditivity_pairs(monkeypatch, settings):
    pairs = []

    class Halt(Exception):
        pass

    def halt(*args, **kwargs):
        raise Halt

    monkeypatch.setattr(suites, "_measure_grid", lambda n: GridSpec(points_per_axis=2, refinement_levels=0))
    monkeypatch.setattr(suites, "superadditivity_check", lambda *args: pairs.append(args) or (2.0, 1.0, True))
    monkeypatch.setattr(suites, "comparison_check", halt)
    with pytest.raises(Halt):
        suites.measures_suite(settings)
    assert len(pairs) == 20


def test_suite_names_are_registered(settings):
    assert "measures" in SUITE_NAMES
    with pytest.raises(ValidationError):
        run_suite("nope", settings)


# ================================
# Command line
# ================================


def test_density_of_sum_of_squares(capsys):
    assert qmahg_cli.main(["density", "--fn", SQUARES]) == qmahg_cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "8"


def test_density_at_a_point_in_float_mode(capsys):
    code = qmahg_cli.main(["--mode", "float", "density", "--fn", "x1^2*t + x2^2", "--point", "0.5,0,0,0,1"])
    assert code == qmahg_cli.EXIT_OK


@pytest.mark.parametrize("argv", [
    ["density", "--fn", "x1 +"],
    ["density", "--fn", "y1^2"],
    ["verify", "nope"],
    ["--n", "9", "density", "--fn", "x1"],
    ["density", "--fn", "x1", "--point", "1,2"],
    ["frobnicate"],
])
def test_malformed_input_exits_with_two(argv, capsys):
    assert qmahg_cli.main(argv) == qmahg_cli.EXIT_INVALID
    assert "error" in capsys.readouterr().err


def test_syntax_error_points_at_the_column(capsys):
    qmahg_cli.main(["density", "--fn", "x1 + y2"])
    err = capsys.readouterr().err
    assert "x1 + y2" in err
    assert "     ^" in err


def test_failing_check_exits_with_one(capsys):
    assert qmahg_cli.main(["psh", "--fn", "-x1^2", "--samples", "8"]) == qmahg_cli.EXIT_FAILED
    assert "not PSH" in capsys.readouterr().out


def test_hypothesis_violation_exits_with_one(capsys):
    argv = ["compare", "--u", SQUARES, "--v", SQUARES + " - 1", "--points", "3", "--refine", "0"]
    assert qmahg_cli.main(argv) == qmahg_cli.EXIT_FAILED
    assert "u = v on the boundary" in capsys.readouterr().err


def test_fundamental_constant(capsys):
    assert qmahg_cli.main(["fundamental", "--q", "1,0,0,0"]) == qmahg_cli.EXIT_OK
    out = capsys.readouterr().out
    assert "level 1" in out and "Lambda = 1" in out


def test_report_is_reproducible(tmp_path):
    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    for path in paths:
        argv = ["verify", "brackets", "--samples", "2", "--seed", "5", "--no-timings", "--report", str(path)]
        assert qmahg_cli.main(argv) == qmahg_cli.EXIT_OK
    first, second = (p.read_bytes() for p in paths)
    assert first == second
    payload = json.loads(first)
    assert validate_report(payload) == []
    assert payload["suite"] == "brackets" and payload["seed"] == 5 and payload["elapsed_ms"] == 0


def test_config_file_fills_unset_flags(tmp_path):
    config = tmp_path / "qmahg.env"
    config.write_text("seed=11\nmode=float\nlog-level=ERROR\n")
    report = tmp_path / "report.json"
    argv = ["--config", str(config), "--seed", "4", "verify", "brackets", "--samples", "1",
            "--report", str(report)]
    assert qmahg_cli.main(argv) == qmahg_cli.EXIT_OK
    payload = json.loads(report.read_text())
    assert payload["seed"] == 4
    assert payload["mode"] == "float"


def test_bad_config_file_exits_with_two(tmp_path, capsys):
    config = tmp_path / "bad.env"
    config.write_text("colour=blue\n")
    assert qmahg_cli.main(["--config", str(config), "density", "--fn", "x1"]) == qmahg_cli.EXIT_INVALID
    assert "colour" in capsys.readouterr().err


def test_export_writes_csv(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    argv = ["export", "--fn", SQUARES, "--out", str(out), "--points", "2"]
    assert qmahg_cli.main(argv) == qmahg_cli.EXIT_OK
    assert out.read_text().splitlines()[0] == "x1,x2,x3,x4,t,density"


def test_timings_can_be_switched_off(monkeypatch, tmp_path):
    monkeypatch.setattr(qmahg_cli, "RECORD_TIMINGS", False)
    report = tmp_path / "report.json"
    assert qmahg_cli.main(["density", "--fn", SQUARES, "--report", str(report)]) == qmahg_cli.EXIT_OK
    assert json.loads(report.read_text())["elapsed_ms"] == 0
