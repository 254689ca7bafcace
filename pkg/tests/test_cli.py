import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bdfdyn.cli import main
from bdfdyn.io import read_checkpoint

ROOT = Path(__file__).resolve().parents[1]

SMALL = """
alpha: 0.1
lambda_cutoff: 1.5
n_per_axis: 3
dt: 0.02
t_final: 0.2
nuclei:
  - {z: 1.0, m: 100.0, sigma: 0.5, x0: [-1.0, 0.0, 0.0], v0: [0.0, 0.02, 0.0]}
  - {z: 1.0, m: 100.0, sigma: 0.5, x0: [1.0, 0.0, 0.0], v0: [0.0, -0.02, 0.0]}
initial_state: {kind: perturbed, epsilon: 0.1, seed: 7}
output: {sample_every: 2}
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_simulate_outputs(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "energy_drift" in printed and "charge_drift" in printed
    lines = (out / "trajectory.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:5] == ["t", "energy", "charge_trQ3", "projector_residual", "hs_norm_Q"]
    assert len(header) == 5 + 12
    assert len(lines) == 1 + 6
    summary = json.loads((out / "summary.json").read_text())
    assert summary["steps"] == 10
    assert summary["energy_drift"] <= 1e-8
    q = read_checkpoint(out / "final_q.bdfq")
    assert q.lattice.size == 19
    last = [float(x) for x in lines[-1].split(",")]
    assert np.linalg.norm(q.mat) == pytest.approx(last[4], rel=1e-12)


def test_simulate_is_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL)
    for d in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for name in ("trajectory.csv", "summary.json", "final_q.bdfq"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_vacuum_without_nuclei_has_constant_columns(tmp_path):
    text = "alpha: 0.2\nlambda_cutoff: 1.5\nn_per_axis: 3\ndt: 0.05\nt_final: 0.5\noutput: {sample_every: 1}\n"
    cfg = write(tmp_path, text)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "v")]) == 0
    rows = (tmp_path / "v" / "trajectory.csv").read_text().splitlines()[1:]
    assert len(rows) == 11
    for r in rows:
        assert r.split(",")[1:] == ["0.0"] * 4


def test_default_output_path_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    text = SMALL.replace("output: {sample_every: 2}", "output: {path: here, sample_every: 5}")
    cfg = write(tmp_path, text)
    assert main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "here" / "summary.json").exists()


def test_configuration_errors_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("alpha: 0.1", "alpha: -1"))
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 1
    assert "alpha" in capsys.readouterr().err
    assert main(["constants", "--config", str(tmp_path / "nope.yaml")]) == 1


def test_divergence_exit_3(tmp_path, capsys):
    text = SMALL.replace("epsilon: 0.1", "epsilon: 1.0") + "integrator: {divergence_bound: 0.01}\n"
    cfg = write(tmp_path, text)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 3
    assert "divergence" in capsys.readouterr().err


def test_regime_warning_on_stderr(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("alpha: 0.1", "alpha: 1.3").replace("t_final: 0.2", "t_final: 0.02"))
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "w")]) == 0
    assert "4/pi" in capsys.readouterr().err
    assert json.loads((tmp_path / "w" / "summary.json").read_text())["warnings"]


def test_check_invariants_passes(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert main(["check", "--config", cfg, "--suite", "invariants"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "properties passed" in out


def test_check_order_passes(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert main(["check", "--config", cfg, "--suite", "order"]) == 0
    assert capsys.readouterr().out.count("PASS") == 2


def test_check_oracle_reports_first_failure(tmp_path, capsys):
    # the reference Gaussian pair misses the 2% target at n = 7
    code = main(["check", "--config", str(ROOT / "configs" / "reference.yaml"), "--suite", "oracle"])
    out = capsys.readouterr().out
    assert code == 2
    assert "FAILED: Coulomb Gaussian pair" in out
    assert out.count("PASS") == 3


def test_constants_report(tmp_path, capsys):
    cfg = write(tmp_path, SMALL + "constants: {samples: 2}\n")
    assert main(["constants", "--config", cfg]) == 0
    out = capsys.readouterr().out
    for key in ("C_F:", "C1:", "C2:", "C3:", "kappa:", "tau_admissible:", "dt_within_tau:"):
        assert key in out
    assert "tau_satisfies_inequality_1: True" in out


def test_bad_subcommand_usage():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, SMALL.replace("t_final: 0.2", "t_final: 0.04"))
    res = subprocess.run(
        [sys.executable, "-m", "bdfdyn.cli", "simulate", "--config", cfg, "--out", str(tmp_path / "m")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "m" / "trajectory.csv").exists()


def test_check_invariants_on_vacuum(tmp_path, capsys):
    cfg = write(tmp_path, "alpha: 0.1\nlambda_cutoff: 1.5\nn_per_axis: 3\ndt: 0.01\nt_final: 0.1\n")
    assert main(["check", "--config", cfg, "--suite", "invariants"]) == 0
    assert "FAIL" not in capsys.readouterr().out
