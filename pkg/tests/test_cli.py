import json
import subprocess
import sys

import numpy as np
import pytest

from newmark_bea import io
from newmark_bea.cli import cli
from newmark_bea.systems import PAPER_C, PAPER_K, PAPER_M

OSCILLATOR = {
    "system": {"builtin": "oscillator-1dof"},
    "methods": [{"name": "newmark", "gamma": "1/2", "beta": "1/6"}],
    "run": {"t_end": 0.4, "dt": 0.02, "halvings": 3, "baseline": "exact"},
    "expectations": [{"method": "newmark", "variable": "q", "expected": 2.0, "tolerance": 0.3}],
}


@pytest.fixture(autouse=True)
def _no_env(monkeypatch):
    monkeypatch.delenv(io.OUTPUT_ENV, raising=False)


def _config(tmp_path, doc, name="oscillator.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_no_arguments_is_a_usage_error(capsys):
    assert cli([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_is_a_usage_error():
    assert cli(["frobnicate"]) == 2


def test_missing_required_option_is_a_usage_error(tmp_path):
    assert cli(["compensate", "--scenario", "dvf-time", "--out", str(tmp_path)]) == 2


def test_help_exits_cleanly(capsys):
    assert cli(["--help"]) == 0
    assert "converge" in capsys.readouterr().out


def test_converge_in_ci_mode_passes(tmp_path):
    out = tmp_path / "res"
    assert cli(["converge", "--config", _config(tmp_path, OSCILLATOR), "--ci", "--out", str(out)]) == 0
    assert (out / "report.csv").exists() and (out / "slopes.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert all(c["passed"] for c in manifest["checks"])


def test_failed_expectation_fails_only_in_ci_mode(tmp_path):
    doc = json.loads(json.dumps(OSCILLATOR))
    doc["expectations"][0]["expected"] = 4.0
    cfg = _config(tmp_path, doc)
    assert cli(["converge", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli(["converge", "--config", cfg, "--ci", "--out", str(tmp_path / "b")]) == 1


def test_fourth_order_compensation_of_the_three_mass_system(tmp_path):
    doc = {"system": {"builtin": "paper-3dof"},
           "methods": [{"name": "newmark", "gamma": "1/2", "beta": "1/6"}],
           "run": {"t_end": 7.0, "dt": 0.7}}
    out = tmp_path / "comp"
    rc = cli(["compensate", "--kind", "fourth-order", "--config", _config(tmp_path, doc),
              "--out", str(out)])
    assert rc == 0
    K_hat = io.load_matrix_market(out / "K_hat.mtx")
    Mi = np.linalg.inv(PAPER_M)
    dt = 0.7
    oracle = PAPER_K + dt**2 / 12 * (PAPER_K @ Mi @ PAPER_K - PAPER_C @ Mi @ PAPER_C @ Mi @ PAPER_K)
    assert K_hat[0, 0] == pytest.approx(oracle[0, 0], rel=1e-12)
    np.testing.assert_allclose(K_hat, oracle, rtol=1e-12)
    assert (out / "F_hat.csv").exists()
    assert json.loads((out / "manifest.json").read_text())["beta"] == "1/6"


def test_distort_writes_matrices(tmp_path):
    out = tmp_path / "d"
    assert cli(["distort", "--scenario", "dvf-time", "--gamma", "0.55", "--beta", "0.28",
                "--out", str(out)]) == 0
    assert io.load_matrix_market(out / "C_tilde.mtx").shape == (3, 3)


def test_run_with_both_formats(tmp_path):
    out = tmp_path / "r"
    doc = {**OSCILLATOR, "run": {"t_end": 0.4, "dt": 0.02}}
    assert cli(["run", "--config", _config(tmp_path, doc), "--format", "both", "--out", str(out)]) == 0
    assert (out / "trajectories" / "newmark.csv").exists() and (out / "position.svg").exists()


def test_environment_variable_chooses_the_output(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(io.OUTPUT_ENV, str(tmp_path / "from_env"))
    doc = {**OSCILLATOR, "output": {"directory": str(tmp_path / "from_config")}}
    assert cli(["energy", "--config", _config(tmp_path, doc)]) == 0
    assert (tmp_path / "from_env" / "energy.csv").exists()
    assert not (tmp_path / "from_config").exists()


def test_errors_give_exit_code_one(tmp_path, capsys):
    bad = {**OSCILLATOR, "run": {"t_end": 0.4, "dt": 0.03}}
    assert cli(["run", "--config", _config(tmp_path, bad), "--out", str(tmp_path)]) == 1
    assert "run/t_end" in capsys.readouterr().err
    assert cli(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    # fourth-order refused for the default beta
    doc = {**OSCILLATOR, "methods": [{"name": "newmark", "compensation": "fourth-order"}],
           "run": {"t_end": 0.4, "dt": 0.02}}
    assert cli(["run", "--config", _config(tmp_path, doc), "--out", str(tmp_path)]) == 1


def test_both_scenario_sources_is_an_error(tmp_path):
    assert cli(["run", "--scenario", "dvf-time", "--config", _config(tmp_path, OSCILLATOR),
                "--out", str(tmp_path)]) == 1


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "newmark_bea", "bench", "--scenario", "nope",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 1 and "nope" in r.stderr
