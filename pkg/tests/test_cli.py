import io
import json
import pathlib
import subprocess
import sys

import pytest

from tetradlab import catalog, cli
from tetradlab.report import Report

SPECS = pathlib.Path(__file__).resolve().parent.parent / "specs"


def run(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), out)
    return code, out.getvalue()


def test_analyze_json_is_deterministic():
    a = run("analyze", "schwarzschild", "--samples", "16", "--json")
    b = run("analyze", "schwarzschild", "--samples", "16", "--json")
    assert a == b and a[0] == 0


def test_report_round_trip_is_exact():
    code, text = run("killing", "desitter_outer", "--samples", "16", "--json")
    assert code == 0
    rep = Report.from_json(text)
    assert rep.to_json() == text
    assert json.loads(text)["schema"] == "tetradlab.report/1"


def test_golden_flag_count():
    total = 0
    for name in catalog.BUILTIN_NAMES:
        code, text = run("killing", name, "--samples", "16", "--json")
        assert code == 0
        total += json.loads(text)["tables"]["summary"]["suspected_typos"]
    assert total == 9


def test_friedmann_summary_text():
    code, text = run("killing", "friedmann", "--samples", "16")
    assert code == 0
    assert "row5" in text and "suspected typo" in text


def test_spec_file_and_out(tmp_path):
    out = tmp_path / "rep.json"
    code, text = run("em", str(SPECS / "minkowski_spherical.json"), "--field",
                     str(SPECS / "coulomb_field.json"), "--samples", "16", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["ok"] is True
    assert "covariant_conservation" in text


def test_failing_identity_exits_one(tmp_path):
    field = tmp_path / "f.json"
    field.write_text(json.dumps({"F": {"01": "-1/r^2"}, "J": ["1/r", "0", "0", "0"]}))
    code, _ = run("em", "minkowski_spherical", "--field", str(field), "--samples", "8")
    assert code == 1


def test_mass_command():
    code, text = run("mass", "schwarzschild_isotropic", "--param", "m=1", "--radii", "100,300,1000",
                     "--json")
    assert code == 0
    assert json.loads(text)["mass"]["extrapolated"] == pytest.approx(1.0, rel=1e-2)


@pytest.mark.parametrize("argv", [
    ["analyze", "kerr"],
    ["mass", "minkowski_spherical", "--radii", "10,20"],
    ["analyze", "schwarzschild", "--param", "q=1"],
    ["analyze", "schwarzschild", "--scale-factor", "t"],
    ["em", "minkowski_spherical", "--field", "/nonexistent.json"],
])
def test_user_errors_exit_two(argv, capsys):
    assert cli.main(argv) == 2
    assert "tetradlab: error:" in capsys.readouterr().err


def test_bad_field_expression_exits_two(tmp_path, capsys):
    field = tmp_path / "f.json"
    field.write_text(json.dumps({"F": {"01": "1/(r"}}))
    assert cli.main(["em", "minkowski_spherical", "--field", str(field)]) == 2


def test_export_then_analyze(tmp_path):
    p = tmp_path / "f.json"
    assert run("export", "friedmann", "--scale-factor", "t^(1/2)", "--out", str(p))[0] == 0
    code, text = run("analyze", str(p), "--samples", "8", "--json")
    assert code == 0 and json.loads(text)["spec"]["name"] == "friedmann"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tetradlab", "list"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert all(n in proc.stdout for n in catalog.BUILTIN_NAMES)
