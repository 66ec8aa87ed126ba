import csv
import json
import subprocess
import sys

import pytest

from kirchnorm.cli import main

MP_CONFIG = """
[grid]
half_width = 2.5
points_per_dim = 1024
[params]
p = 12
[potential]
family = gaussian
h0_rule = mountain_pass_fraction
h0_fraction = 0.1
[output]
scan_points = 60
"""


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _manifest(path):
    return json.loads((path / "manifest.json").read_text())


def test_gn_prints_profile(tmp_path, capsys):
    code, out, _ = _run(capsys, "gn", "--out", tmp_path, "--set", "params.p=4", "--set", "params.q=1.5")
    assert code == 0
    prof = json.loads(out)
    assert prof["gamma_p"] == 0.25
    assert json.loads((tmp_path / "gn_profile.json").read_text())["gamma_p"] == 0.25


def test_limit_subcritical_manifest(tmp_path, capsys):
    code, out, _ = _run(capsys, "limit", "--out", tmp_path, "--set", "grid.half_width=30",
                        "--set", "grid.points_per_dim=1536")
    assert code == 0 and json.loads(out)["status"] == "ok"
    m = _manifest(tmp_path)
    assert m["results"]["l_inf_c"] < 0
    assert m["command"] == "limit" and m["seed"] == 0 and m["wall_time_s"] >= 0
    assert (tmp_path / "limit_ground_state.kfld").exists() and (tmp_path / "limit_ground_state.png").exists()


def test_bad_q_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[params]\nq = 2.5\n")
    code, _, err = _run(capsys, "limit", "--config", cfg, "--out", tmp_path / "run")
    assert code == 2
    diag = json.loads(err)
    assert diag["field"] == "params.q" and "1 <= q < 2" in diag["message"]


def test_regime_mismatch_exit_2(tmp_path, capsys):
    code, _, err = _run(capsys, "solve-mp", "--out", tmp_path)
    assert code == 2 and json.loads(err)["field"] == "params.p"


def test_assumption_violation_exit_3(tmp_path, capsys):
    cfg = tmp_path / "mp.ini"
    cfg.write_text(MP_CONFIG.replace("0.1", "1.5"))
    code, _, err = _run(capsys, "solve-mp", "--config", cfg, "--out", tmp_path / "run")
    assert code == 3 and json.loads(err)["error"] == "assumption"
    assert (tmp_path / "run" / "error.json").exists()
    assert _manifest(tmp_path / "run")["status"] == "error"


def test_seed_must_be_u64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["limit", "--seed", str(2**64)])
    assert info.value.code == 2


def test_mountain_pass_writes_scans_and_plots(tmp_path, capsys):
    cfg = tmp_path / "mp.ini"
    cfg.write_text(MP_CONFIG)
    code, _, _ = _run(capsys, "solve-mp", "--config", cfg, "--out", tmp_path / "run")
    run = tmp_path / "run"
    assert code == 0
    res = _manifest(run)["results"]
    assert res["m_hc"] < res["m_c"] and res["lam"] > 0
    with open(run / "phi_scan.csv", newline="") as fh:
        assert next(csv.reader(fh)) == ["t", "phi", "psi"]
    for name in ("phi_scan.png", "path.png", "mountain_pass.png", "path.csv"):
        assert (run / name).exists()

    code, out, _ = _run(capsys, "export", run / "phi_scan.scan.json", "--format", "json")
    assert code == 0 and json.loads(out)["status"] == "ok"


def test_export_missing(tmp_path, capsys):
    code, _, err = _run(capsys, "export", tmp_path / "nope.scan.json")
    diag = json.loads(err)
    assert code == 2 and diag["error"] == "missing-artifact" and diag["path"].endswith("nope.scan.json")


def test_runs_are_bitwise_reproducible(tmp_path, capsys):
    args = ["solve-min", "--set", "grid.half_width=30", "--set", "grid.points_per_dim=1536",
            "--set", "potential.family=gaussian", "--set", "potential.h0=0.1", "--set", "solver.starts=3",
            "--seed", "42"]
    assert _run(capsys, *args, "--out", tmp_path / "a")[0] == 0
    assert _run(capsys, *args, "--out", tmp_path / "b", "--threads", "2")[0] == 0
    ra, rb = _manifest(tmp_path / "a")["results"], _manifest(tmp_path / "b")["results"]
    assert ra["l_c"] == rb["l_c"] and ra["lam"] == rb["lam"]
    assert _manifest(tmp_path / "a")["seed"] == 42


def test_verify_identities(tmp_path, capsys):
    code, _, _ = _run(capsys, "verify", "--out", tmp_path, "--set", "verify.groups=identities",
                      "--set", "verify.samples=4")
    assert code == 0
    rep = json.loads((tmp_path / "verification.json").read_text())
    assert all(c["pass"] for c in rep["checks"])


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kirchnorm.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("kirchnorm ")


def test_replay_from_manifest(tmp_path, capsys):
    args = ["--set", "grid.half_width=30", "--set", "grid.points_per_dim=1536", "--set", "potential.family=gaussian",
            "--set", "potential.h0=0.1", "--set", "solver.starts=2", "--seed", "3"]
    assert _run(capsys, "solve-min", *args, "--out", tmp_path / "first")[0] == 0
    first = _manifest(tmp_path / "first")
    cfg = tmp_path / "replay.ini"
    cfg.write_text(first["config_text"])
    assert _run(capsys, "solve-min", "--config", cfg, "--out", tmp_path / "again")[0] == 0
    again = _manifest(tmp_path / "again")
    assert again["results"] == first["results"]
