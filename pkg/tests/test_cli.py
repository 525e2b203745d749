import csv
import json
import subprocess
import sys

import pytest

from sharpfront import cli


def run_cli(*args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    return list(csv.reader(open(path)))


def test_spectrum_full(tmp_path):
    assert run_cli("spectrum", "--alpha", 1.5, "--j-max", 1024, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert rows[0] == ["j", "L", "omega", "d2omega"] and len(rows) == 1026
    rep = json.load(open(tmp_path / "spectrum_report.json"))
    assert rep["passed"] and rep["certified"] and rep["config"]["alpha"] == 1.5
    man = json.load(open(tmp_path / "manifest.json"))
    assert man["command"] == "spectrum" and man["config"]["n"] == 256


def test_spectrum_bad_alpha(tmp_path, capsys):
    assert run_cli("spectrum", "--alpha", 2.5, "--out", tmp_path) != 0
    assert "alpha" in capsys.readouterr().err


def test_spectrum_minimal(tmp_path):
    assert run_cli("spectrum", "--alpha", 1.5, "--j-max", 2, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert [r[0] for r in rows[1:]] == ["0", "1", "2"]
    assert float(rows[3][2]) > 0


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1.5, "bogus": 1}))
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path) == 2


def test_simulate_zero_data(tmp_path):
    assert run_cli("simulate", "--eps", 0, "--n", 32, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    head = rows[0]
    for r in rows[1:]:
        vals = dict(zip(head, map(float, r)))
        assert all(abs(v) <= 1e-15 for k, v in vals.items() if k != "t")
    assert (tmp_path / "plot_trajectory.py").exists()


def test_simulate_demo_config(tmp_path):
    cfg = tmp_path / "demo.json"
    cfg.write_text(json.dumps({"alpha": 1.5, "n": 256, "eps": 0.01, "t_final": 1.0}))
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "o") == 0
    rep = json.load(open(tmp_path / "o" / "simulate_report.json"))
    assert rep["mean_f_drift"] <= 1e-10
    assert rep["max_relative_hamiltonian_rate"] <= 1e-8
    assert rep["config"]["dealias_fraction"] == pytest.approx(2 / 3)


def test_restart_is_bit_exact(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1.5, "n": 64, "t_final": 1.0, "checkpoint_every": 2}))
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "a") == 0
    cks = sorted((tmp_path / "a" / "checkpoints").iterdir())
    assert len(cks) >= 3
    assert run_cli("simulate", "--config", cfg, "--restart", cks[1],
                   "--out", tmp_path / "b") == 0
    last = cks[-1].name
    assert (tmp_path / "b" / "checkpoints" / last).read_bytes() == cks[-1].read_bytes()


def test_outputs_are_deterministic(tmp_path):
    names = ("trajectory.csv", "simulate_report.json", "manifest.json")
    first = None
    for _ in range(2):
        assert run_cli("simulate", "--n", 32, "--t-final", 0.5, "--out", tmp_path) == 0
        got = [(tmp_path / name).read_bytes() for name in names]
        got += [p.read_bytes() for p in sorted((tmp_path / "checkpoints").iterdir())]
        first = first or got
    assert got == first


@pytest.mark.parametrize("which", ["identity", "integrals"])
def test_verify(tmp_path, which):
    assert run_cli("verify", which, "--out", tmp_path) == 0
    rep = json.load(open(tmp_path / f"verify_{which}.json"))
    assert rep["passed"] and rep[which]["passed"]


def test_verify_linearization_table(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "LINEARIZATION_ALPHAS", (1.5,))
    assert run_cli("verify", "linearization", "--out", tmp_path) == 0
    rows = json.load(open(tmp_path / "verify_linearization.json"))["linearization"]["rows"]
    assert len(rows) == 32 and all(r["rel_error"] <= 1e-4 for r in rows)


def test_lifespan_reports_censoring(tmp_path):
    cfg = tmp_path / "l.json"
    cfg.write_text(json.dumps({"alpha": 1.5, "n": 32, "t_cap_base": 0.5}))
    code = run_cli("lifespan", "--config", cfg, "--out", tmp_path)
    rep = json.load(open(tmp_path / "lifespan_report.json"))
    assert code == 1 and not rep["passed"] and rep["slope"] is None
    assert all(r["censored"] for r in rep["runs"])
    assert read_csv(tmp_path / "lifespan.csv")[0] == ["epsilon", "doubling_time", "censored"]


def test_console_script_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "sharpfront.cli", "spectrum", "--alpha", "0.5",
                          "--j-max", "16", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and "PASS" in out.stdout
