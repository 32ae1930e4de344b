import json
from fractions import Fraction

import pytest

from kuranishi.cli import COMMANDS, Options, main, run
from kuranishi.spec_file import parse_spec

from .support import FIXTURES, read_fixture


@pytest.mark.parametrize("fixture, command, options, exit_code", [
    ("zero", "validate", Options(), 0),
    ("zero", "complete", Options(), 0),
    ("uv_toy", "mc-solve", Options(mode="ansatz", grid=[Fraction(1, 2), Fraction(1)]), 0),
    ("uv_toy", "mc-solve", Options(mode="ansatz", grid=[Fraction(1)]), 3),
    ("uv_toy", "mc-solve", Options(mode="newton"), 3),
    ("uv_toy", "mc-verify", Options(), 0),
    ("uv_toy", "twist", Options(), 0),
    ("exterior2", "validate", Options(), 0),
    ("exterior2", "cyclic-check", Options(), 0),
    ("exterior2", "lemma-check", Options(samples=3), 0),
    ("exterior2_mutant", "validate", Options(), 1),
    ("definite", "darboux-check", Options(samples=3), 0),
    ("definite", "kuranishi", Options(), 0),
    ("definite", "certify-unobstructed", Options(samples=3), 0),
    ("darboux_perturbed", "darboux-check", Options(samples=3), 1),
    ("hodge", "hodge", Options(), 0),
    ("cayley", "cayley", Options(), 0),
    ("lattice", "lattice", Options(), 0),
])
def test_exit_codes(fixture, command, options, exit_code):
    report = run(command, read_fixture(fixture), options)
    assert report.exit_code == exit_code, report.render_text()


def test_every_command_is_covered():
    assert len(COMMANDS) == 13


def test_reports_are_deterministic():
    text = read_fixture("definite")
    first = run("certify-unobstructed", text, Options(samples=2, seed=11)).render_json()
    second = run("certify-unobstructed", text, Options(samples=2, seed=11)).render_json()
    assert first == second


def test_json_report_layout():
    report = json.loads(run("validate", read_fixture("exterior2"), Options()).render_json())
    assert report["format_version"] == 1
    assert report["verdict"] == "PASS"
    assert report["cutoffs"] == {"arity": 6, "energy": "3"}
    assert report["details"]["strict"] is True
    assert report["details"]["pairing_nondegenerate"] is True
    assert "timing_seconds" not in report


def test_cutoff_flags_override_spec():
    report = run("validate", read_fixture("uv_toy"), Options(arity=3, energy=Fraction(2)))
    assert report.cutoffs == {"arity": 3, "energy": "2"}


def test_failing_validate_names_the_violation():
    report = run("validate", read_fixture("exterior2_mutant"), Options())
    assert report.verdict == "FAIL"
    assert report.witnesses


def test_twisted_spec_parses():
    report = run("twist", read_fixture("uv_toy"), Options(element="b"))
    twisted = parse_spec(report.details["twisted_spec"])
    assert twisted.structure().is_strict()


def test_lattice_fixture_basis():
    report = run("lattice", read_fixture("lattice"), Options())
    assert report.details["sign"] == 1
    assert len(report.details["basis"]) == 2


def test_non_unimodular_lattice_is_an_input_error():
    doc = json.loads(read_fixture("lattice"))
    doc["geometry"]["lattice"] = [[2, 0], [0, 1]]
    report = run("lattice", json.dumps(doc), Options())
    assert report.verdict == "ERROR"
    assert report.exit_code == 2


def test_unknown_command():
    report = run("frobnicate", read_fixture("zero"), Options())
    assert report.exit_code == 2
    assert report.witnesses[0]["error_type"] == "UnknownCommandError"


def test_malformed_spec_is_an_input_error():
    report = run("validate", "{", Options())
    assert report.exit_code == 2
    assert report.witnesses[0]["error_type"] == "SpecError"


def test_missing_pairing_is_an_input_error():
    assert run("cyclic-check", read_fixture("uv_toy"), Options()).exit_code == 2


def test_main_writes_report(capsys):
    code = main(["validate", str(FIXTURES / "exterior2.json"), "--format", "json"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["command"] == "validate"


def test_main_timing_flag(capsys):
    code = main(["hodge", str(FIXTURES / "hodge.json"), "--format", "json", "--timing"])
    assert code == 0
    assert "timing_seconds" in json.loads(capsys.readouterr().out)


def test_main_missing_file(tmp_path, capsys):
    code = main(["validate", str(tmp_path / "absent.json")])
    assert code == 2
    assert "ERROR" in capsys.readouterr().out


def test_main_bad_flag():
    assert main(["validate", "spec.json", "--format", "yaml"]) == 2


def test_main_grid_flag(capsys):
    code = main(["mc-solve", str(FIXTURES / "uv_toy.json"), "--mode", "ansatz", "--grid", "1/2,1"])
    assert code == 0
    assert capsys.readouterr().out.startswith("mc-solve: PASS")


def test_complete_defaults_to_dimension_four():
    report = run("complete", read_fixture("zero"), Options())
    assert report.details["n"] == 4
    completed = parse_spec(report.details["completed_spec"])
    assert completed.pairing_n == 4
    assert run("complete", read_fixture("zero"), Options(dimension=6)).details["n"] == 6


@pytest.mark.parametrize("options", [Options(energy=Fraction(5)), Options(arity=9)])
def test_cutoff_flags_above_spec_are_input_errors(options):
    report = run("validate", read_fixture("uv_toy"), options)
    assert report.exit_code == 2
    assert report.witnesses[0]["error_type"] == "CutoffExceededError"
