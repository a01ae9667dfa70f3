import json
import math

import pytest

from lpdiss.cli.main import REPORT_KEYS, run

FAST = ["--dirs", "400", "--refine", "10", "--points", "4"]


def report_of(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def diag_file(write_json):
    return write_json("diag.json", {"fields": [{"matrix": [[1, 0], [0, 9]]}]})


@pytest.fixture
def twisted_file(write_json):
    return write_json("twisted.json", {"n": 2, "matrix": [[1, [0, 1]], [[0, 1], 1]]})


def test_elasticity_inside_region(capsys):
    assert run(["check", "--op", "elasticity", "--nu", "0.3", "--p", "2", *FAST]) == 0
    report = report_of(capsys)
    assert set(REPORT_KEYS) <= set(report)
    assert report["verdict"]["status"] == "holds"
    assert report["margin"] == pytest.approx(0.172839, abs=1e-6)
    assert report["p_interval"]["p_lo"] == pytest.approx(1.092013, abs=1e-6)


def test_elasticity_outside_region(capsys):
    assert run(["check", "--op", "elasticity", "--nu", "0.3", "--p", "20", *FAST]) == 1
    report = report_of(capsys)
    assert report["verdict"]["status"] == "fails"
    assert report["witness"] is not None


def test_real_angle(capsys):
    assert run(["angle", "--p", "4"]) == 0
    interval = report_of(capsys)["interval"]
    assert interval["theta_plus"] == pytest.approx(math.pi / 3)
    assert interval["theta_minus"] == pytest.approx(-math.pi / 3)


def test_usage_errors(capsys):
    assert run(["check", "--op", "elasticity", "--nu", "0.3"]) == 2
    assert "needs --p" in capsys.readouterr().err
    assert run(["check", "--op", "tensor", "--p", "2"]) == 2
    assert run(["check", "--op", "elasticity", "--nu", "0.3", "--p", "1"]) == 2
    assert run(["check", "--op", "diag", "--p", "2"]) == 2


def test_diagonal_system(capsys, diag_file):
    assert run(["check", "--op", "diag", "--file", str(diag_file), "--p", "10", *FAST]) == 1
    report = report_of(capsys)
    assert report["margin"] < -1e-3
    assert report["witness"]["h"] == 1
    assert run(["check", "--op", "diag", "--file", str(diag_file), "--p", "2", *FAST]) == 0
    interval = report_of(capsys)["p_interval"]
    assert interval["p_lo"] == pytest.approx(1.25)
    assert interval["p_hi"] == pytest.approx(5.0)


def test_diagonal_interval_of_a_rotated_coefficient(capsys, write_json):
    # eigenvalues 1 and 9, eigenvectors off the axes
    path = write_json("rot.json", {"fields": [{"matrix": [[5, 4], [4, 5]]}]})
    assert run(["check", "--op", "diag", "--file", str(path), "--p", "3", *FAST]) == 0
    interval = report_of(capsys)["p_interval"]
    assert (interval["p_lo"], interval["p_hi"]) == pytest.approx((1.25, 5.0), abs=1e-12)
    twisted = write_json("herm.json", {"fields": [{"matrix": [[1, [0, 1]], [[0, -1], 1]]}]})
    run(["check", "--op", "diag", "--file", str(twisted), "--p", "2", *FAST])
    assert report_of(capsys)["p_interval"] is None


def test_general_system_is_necessary_only(capsys, write_json):
    eye = {"n": 2, "matrix": [[1, 0], [0, 1]]}
    zero = {"n": 2, "matrix": [[0, 0], [0, 0]]}
    path = write_json("lap.json", {"blocks": [[eye, zero], [zero, eye]]})
    assert run(["check", "--op", "general2d", "--file", str(path), "--p", "2", *FAST]) == 3
    report = report_of(capsys)
    assert report["verdict"]["necessary_only"]
    assert "NECESSARY-ONLY" in report["notes"]


def test_angle_precondition_fails(capsys, twisted_file):
    assert run(["angle", "--op", "scalar", "--file", str(twisted_file), "--p", "12", *FAST]) == 1
    report = report_of(capsys)
    assert report["notes"]
    assert report["witness"] is not None


def test_reports_are_deterministic(tmp_path, capsys):
    args = ["check", "--op", "elasticity", "--nu", "0.3", "--p", "20", "--seed", "9", *FAST]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run([*args, "--out", str(first)]) == 1
    assert run([*args, "--out", str(second)]) == 1
    assert first.read_bytes() == second.read_bytes()
    assert capsys.readouterr().out == ""


def test_region_csv(capsys):
    assert run(["region", "--op", "elasticity", "--nu-min", "0.3", "--nu-max", "0.9", "--steps", "3", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "nu,p_lo,p_hi,empty,branch,strong_elliptic"
    # 0.3 .. 0.9 crosses 1/2: two rows per side, 1/2 itself left out
    nus = [float(line.split(",")[0]) for line in lines[1:]]
    assert nus == pytest.approx([0.3, 0.4, 0.7, 0.9])
    assert [line.split(",")[4] for line in lines[1:]] == ["below", "below", "above", "above"]
    assert lines[3].endswith("True,above,False")
    assert lines[1].endswith("below,True")
    assert run(["region", "--r-max", "9", "--steps", "2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,p_lo,p_hi,open"
    r, p_lo, p_hi, _ = lines[2].split(",")
    assert float(r) == 9.0
    assert float(p_lo) == pytest.approx(1.25)
    assert float(p_hi) == pytest.approx(5.0)


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("LPDISS_SEED", "42")
    assert run(["angle", "--p", "3"]) == 0
    assert report_of(capsys)["seed"] == 42
    assert run(["angle", "--p", "3", "--seed", "0x2a1"]) == 0
    assert report_of(capsys)["seed"] == 0x2A1


def test_config_file_and_flags(capsys, write_json):
    config = write_json("run.json", {"op": "elasticity", "nu": 0.3, "p": 2.0, "seed": 5, "dirs": 400, "refine": 10})
    assert run(["check", "--config", str(config)]) == 0
    assert report_of(capsys)["seed"] == 5
    assert run(["check", "--config", str(config), "--p", "20"]) == 1
    bad = write_json("bad.json", {"colour": "red"})
    assert run(["check", "--config", str(bad)]) == 2


def test_shift_for_elasticity(capsys):
    assert run(["shift", "--op", "elasticity", "--nu", "0.3", "--p", "2"]) == 0
    assert report_of(capsys)["oracle"]["k_sup"] == pytest.approx(1.0)


def test_oracle_finds_violation(capsys, diag_file):
    assert run(["oracle", "--op", "diag", "--file", str(diag_file), "--p", "10", *FAST]) == 1
    report = report_of(capsys)
    assert report["margin"] < -1e-8
    assert report["oracle"]["source"].startswith("ladder")


def test_simulation_of_a_dissipative_system(capsys, diag_file):
    assert run(["sim", "--op", "diag", "--file", str(diag_file), "--p", "3", "--T", "2e-4"]) == 0
    assert report_of(capsys)["oracle"]["monotone"]
