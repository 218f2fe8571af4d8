import json

import pytest

from wml.cli import main
from wml.report import parse_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_preset_ok(capsys):
    code, out, _ = run(capsys, "classify", "--preset", "hyperbolic-2")
    assert code == 0
    doc = parse_report(out)              # validates against the schema
    assert doc["results"]["stochastic_completeness"]["verdict"] == "Yes"
    assert doc["results"]["feller"]["verdict"] == "Yes"
    assert doc["manifold"]["dimension"] == 2


def test_classify_non_feller_preset(capsys):
    code, out, _ = run(capsys, "classify", "--preset", "exp-alpha-2-3")
    assert code == 0
    doc = parse_report(out)
    assert doc["results"]["stochastic_completeness"]["verdict"] == "Yes"
    assert doc["results"]["feller"]["verdict"] == "No"


def test_classify_manifold_file(capsys, tmp_path):
    spec = tmp_path / "h2.txt"
    spec.write_text('dimension = 2\ng = "sinh(r)"\nf = "0"\n')
    code, out, _ = run(capsys, "classify", "--manifold", str(spec))
    assert code == 0
    assert parse_report(out)["results"]["feller"]["verdict"] == "Yes"


def test_missing_file_exits_2(capsys):
    code, _, err = run(capsys, "classify", "--manifold", "/nope/missing.txt")
    assert code == 2
    assert "error" in err


def test_unknown_preset_exits_2(capsys):
    code, _, err = run(capsys, "classify", "--preset", "moebius-9")
    assert code == 2


def test_spectrum_ball(capsys):
    code, out, _ = run(capsys, "spectrum", "--preset", "euclidean-3",
                       "--ball", "1")
    assert code == 0
    doc = parse_report(out)
    assert doc["results"]["lambda1"] == pytest.approx(9.8696, abs=1e-3)


def test_spectrum_negative_ball_exits_2(capsys):
    code, _, _ = run(capsys, "spectrum", "--preset", "euclidean-3",
                     "--ball", "-1")
    assert code == 2


def test_spectrum_ess_csv(capsys, tmp_path):
    csv = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "spectrum", "--preset", "hyperbolic-2",
                       "--ess", "1,2", "--atol", "1e-5",
                       "--csv", str(csv))
    assert code == 0
    doc = parse_report(out)
    assert doc["results"]["bottom_estimate"] == pytest.approx(0.25,
                                                              abs=1e-3)
    lines = csv.read_text().splitlines()
    assert lines[0] == "R,lambda1_exterior"
    assert len(lines) == 3
    assert (tmp_path / "sweep.gp").exists()   # gnuplot companion


def test_simulate_determinism_golden(capsys, tmp_path):
    argv = ("simulate", "--preset", "hyperbolic-2", "--paths", "300",
            "--t-max", "0.5", "--seed", "7")
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    r1 = json.dumps(parse_report(out1)["results"], sort_keys=True)
    r2 = json.dumps(parse_report(out2)["results"], sort_keys=True)
    assert r1 == r2                       # byte-identical results payload


def test_simulate_path_minimum_exits_2(capsys):
    code, _, err = run(capsys, "simulate", "--preset", "euclidean-3",
                       "--paths", "10")
    assert code == 2
    assert "n_paths" in err


def test_simulate_hitting_mode(capsys):
    code, out, _ = run(capsys, "simulate", "--preset", "euclidean-3",
                       "--paths", "500", "--t-max", "2", "--r0", "2",
                       "--hit-radius", "1", "--hit-lambda", "1")
    assert code == 0
    doc = parse_report(out)
    (_r0, _lam, est, _ci) = doc["results"]["hitting_estimates"][0]
    assert est == pytest.approx(0.18394, abs=0.05)


def test_reproduce_bogus_exits_2(capsys):
    code, _, err = run(capsys, "reproduce", "bogus")
    assert code == 2
    assert "unknown example id" in err


def test_reproduce_feller_table(capsys, tmp_path):
    csv = tmp_path / "alpha.csv"
    code, out, _ = run(capsys, "reproduce", "feller-alpha-table",
                       "--csv", str(csv))
    assert code == 0
    doc = parse_report(out)
    table = doc["results"]["table"]
    assert len(table) == 12
    assert all(row["pass"] for row in table)
    assert len(csv.read_text().splitlines()) == 13


def test_out_file(capsys, tmp_path):
    out_path = tmp_path / "rep.json"
    code, out, _ = run(capsys, "classify", "--preset", "euclidean-3",
                       "--out", str(out_path))
    assert code == 0
    assert out == ""                      # written to the file instead
    parse_report(out_path.read_text())
