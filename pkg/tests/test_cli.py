import csv
import json
import math

import pytest

from pamcat.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def strip_clock(rec):
    rec = json.loads(json.dumps(rec))
    rec["manifest"].pop("wall_clock_seconds")
    return json.dumps(rec, sort_keys=True)


def test_green_values(capsys):
    code, rec = run_cli(capsys, "green", "--d", "3", "--mu", "0")
    assert code == 0
    assert rec["R"] == pytest.approx(0.25273101, rel=1e-7)
    assert rec["r_d"] == pytest.approx(3.95677602, rel=1e-7)
    assert rec["diagnostics"]["route_gap"] < 1e-8

    code, rec = run_cli(capsys, "green", "--d", "2", "--mu", "0")
    assert code == 0
    assert rec["R"] == "inf" and rec["r_d"] == 0.0

    code, rec = run_cli(capsys, "green", "--d", "1", "--mu", "5")
    assert code == 0
    assert rec["R"] == pytest.approx(1.0 / math.sqrt(45.0), rel=1e-8)


def test_green_tail_flag(capsys):
    code, rec = run_cli(capsys, "green", "--d", "3", "--mu", "0",
                        "--a", "1.0")
    assert code == 0
    assert rec["G_a"] == pytest.approx(0.0486895108, rel=1e-7)


def test_exit_code_on_domain_error(capsys):
    code, rec = run_cli(capsys, "green", "--d", "9", "--mu", "0")
    assert code == 2 and rec is None


def test_exit_code_on_numerical_error(capsys):
    # pinned estimator with one replica at a long horizon cannot hit the
    # endpoint scan: degenerate estimator
    code, rec = run_cli(capsys, "mc", "pinned", "--d", "3", "--t", "3",
                        "--replicas", "1", "--seed", "1")
    assert code == 3 and rec is None


def test_phase_single_point(capsys):
    code, rec = run_cli(capsys, "phase", "--d", "3", "--gamma", "0.5")
    assert code == 0
    assert rec["strongly_catalytic"] is False
    assert rec["lambda_p_finite"] is True
    assert rec["verdict"] == "StrongForSmallAndLargeKappa"
    code, rec = run_cli(capsys, "phase", "--d", "2")
    assert rec["strongly_catalytic"] is True and rec["verdict"] == \
        "StrongAllKappa"


def test_mc_lambda_kappa_zero(capsys):
    code, rec = run_cli(capsys, "mc", "lambda", "--d", "3", "--kappa", "0",
                        "--t", "2", "--replicas", "1")
    assert code == 0
    assert rec["std_error"] == 0.0
    assert rec["diagnostics"]["deterministic"] is True
    assert rec["estimate"] > 0


def test_mc_rerun_is_byte_identical(capsys):
    args = ("mc", "lambda", "--d", "3", "--t", "1",
            "--replicas", "64", "--seed", "5")
    _, a = run_cli(capsys, *args)
    _, b = run_cli(capsys, *args)
    assert strip_clock(a) == strip_clock(b)


def test_mc_scaling_check(capsys):
    code, rec = run_cli(capsys, "mc", "scaling-check", "--d", "3",
                        "--kappa", "1", "--t", "1", "--replicas", "64",
                        "--seed", "3")
    assert code == 0
    assert rec["pass"] is True
    assert rec["gap"] == 0.0   # kappa = 1 shares the substreams


def test_mc_quenched(capsys):
    code, rec = run_cli(capsys, "mc", "quenched", "--d", "2", "--t", "0.5",
                        "--replicas", "30", "--seed", "2",
                        "--box-radius", "4")
    assert code == 0
    assert rec["estimate"] > 0
    assert rec["field"]["walkers"] > 0


def test_polaron_record(capsys, tmp_path):
    prof = tmp_path / "profile.csv"
    code, rec = run_cli(capsys, "polaron", "--n", "800",
                        "--eps", "1e-3", "--K", "1e3",
                        "--csv", str(prof))
    assert code == 0
    assert rec["P"] == pytest.approx(6.8716521e-4, rel=1e-4)
    assert rec["virial_residual"] < 0.01
    assert rec["four_sqrt_pi_P"] == pytest.approx(
        4 * math.sqrt(math.pi) * rec["P"], rel=1e-6)
    assert rec["P_p_truncated"] <= rec["P_p"]
    rows = list(csv.DictReader(open(prof)))
    assert len(rows) == 800 and float(rows[0]["f"]) > 0
    assert str(prof) in rec["manifest"]["outputs"]


def test_out_flag_writes_same_json(capsys, tmp_path):
    target = tmp_path / "rec.json"
    code, rec = run_cli(capsys, "--out", str(target),
                        "green", "--d", "3", "--mu", "1")
    assert code == 0
    on_disk = json.loads(target.read_text())
    assert on_disk == rec


def test_phase_sweep_csv(capsys, tmp_path):
    sweep = tmp_path / "sweep.csv"
    code, rec = run_cli(capsys, "phase", "--d", "3", "--csv", str(sweep))
    assert code == 0 and rec["sweep_rows"] == 200
    rows = list(csv.DictReader(open(sweep)))
    assert len(rows) == 200
    for row in rows:
        strong = row["strongly_catalytic"] == "True"
        assert (float(row["hat_lambda_p"]) > 0) == strong
