import csv
import os

import pytest

from kawahara_control.cli import main

BASE_LINEAR = """\
[problem]
truncation = 8
horizon = 8.0
solver = min_norm

[initial_state]
1 = 0.5
2 = 0.25

[output]
directory = {out}
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read_bytes(d):
    return {
        name: (d / name).read_bytes() for name in sorted(os.listdir(d))
    }


def test_eig_reports_closed_form_moduli(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, "eig.ini", f"[problem]\ntruncation = 5\n[output]\ndirectory = {out}\n")
    assert main(["eig", "--config", cfg]) == 0
    with open(out / "summary.csv", newline="") as fh:
        rows = {(r["quantity"], r["i"]): float(r["re"]) for r in csv.DictReader(fh)}
    for k, nu in [(1, 1.0), (2, 38.0), (3, 267.0), (4, 1084.0), (5, 3245.0)]:
        assert rows[("modulus", str(k))] == nu
    assert rows[("min_gap", "")] == 2.0
    assert main(["verify", "--config", cfg]) == 0


def test_control_linear_passes_and_verifies(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, "lin.ini", BASE_LINEAR.format(out=out))
    assert main(["control-linear", "--config", cfg]) == 0
    expected = {
        "control.csv", "control_coefficients.csv", "initial_state.csv",
        "report.txt", "summary.csv", "target_state.csv", "trajectory.csv",
    }
    assert expected <= set(os.listdir(out))
    assert main(["verify", "--config", cfg]) == 0


def test_repeated_runs_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cfg = _write(tmp_path, "lin.ini", BASE_LINEAR.format(out=out1))
    assert main(["control-linear", "--config", cfg]) == 0
    assert main(["control-linear", "--config", cfg, "--out", str(out2)]) == 0
    assert _read_bytes(out1) == _read_bytes(out2)


def test_verify_detects_tampered_summary(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, "lin.ini", BASE_LINEAR.format(out=out))
    assert main(["control-linear", "--config", cfg]) == 0
    path = out / "summary.csv"
    text = path.read_text().replace("0.47451530241597606", "0.5")
    path.write_text(text)
    assert main(["verify", "--config", cfg]) == 1


def test_missing_profile_file_leaves_no_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path, "bad.ini",
        "[problem]\nprofile = file\nprofile_file = missing.csv\n"
        f"[output]\ndirectory = {out}\n",
    )
    assert main(["control-linear", "--config", cfg]) == 1
    assert not out.exists()


def test_short_horizon_rejected_for_series_solver(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path, "short.ini",
        "[problem]\ntruncation = 2\nhorizon = 6.0\nsolver = biortho_series\n"
        f"[output]\ndirectory = {out}\n",
    )
    assert main(["control-linear", "--config", cfg]) == 1
    assert not out.exists()


def test_unknown_solver_rejected(tmp_path):
    cfg = _write(tmp_path, "bad.ini", "[problem]\nsolver = magic\n")
    assert main(["eig", "--config", cfg]) == 1


def test_biortho_series_control_linear(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path, "series.ini",
        "[problem]\ntruncation = 2\nhorizon = 8.0\nsolver = biortho_series\n"
        "endpoint_tolerance = 1e-6\n"
        "[initial_state]\n1 = 0.5\n2 = 0.25\n"
        "[biortho]\nindices = 1, 2\n"
        f"[output]\ndirectory = {out}\n",
    )
    assert main(["control-linear", "--config", cfg]) == 0
    assert main(["verify", "--config", cfg]) == 0


def test_biortho_subcommand_defect(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path, "bio.ini",
        "[problem]\ntruncation = 8\nhorizon = 8.0\n[biortho]\nindices = 1, 2\n"
        f"[output]\ndirectory = {out}\n",
    )
    assert main(["biortho", "--config", cfg]) == 0
    with open(out / "summary.csv", newline="") as fh:
        rows = {(r["quantity"], r["i"], r["j"]): complex(float(r["re"]), float(r["im"]))
                for r in csv.DictReader(fh)}
    assert abs(rows[("max_defect", "", "")]) <= 1e-3
    assert abs(rows[("pairing", "1", "1")] - 1.0) <= 1e-3
    assert abs(rows[("pairing", "1", "-1")]) <= 1e-3
    assert main(["verify", "--config", cfg]) == 0


def test_control_nonlinear_and_verify(tmp_path):
    out = tmp_path / "out"
    cfg = _write(
        tmp_path, "nl.ini",
        "[problem]\ntruncation = 4\nhorizon = 8.0\n"
        "[initial_state]\n1 = 0.005\n"
        "[nonlinear]\ntime_step = 2e-3\n"
        f"[output]\ndirectory = {out}\n",
    )
    assert main(["control-nonlinear", "--config", cfg]) == 0
    assert main(["verify", "--config", cfg]) == 0


def test_seed_validation():
    with pytest.raises(SystemExit):
        main(["eig", "--config", "x.ini", "--seed", "-1"])
