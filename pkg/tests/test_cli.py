import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from memstring.cli import main

EXP_SET = ["--set", "kernel.type=exponential", "--set", "kernel.a=0.4", "--set", "kernel.eta=1"]


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_eig_first_row(tmp_path):
    assert run(tmp_path, "eig", "--set", "n_modes=4") == 0
    header, data = read_csv(tmp_path / "eig.csv")
    assert header == ["n", "lambda", "re_omega", "im_omega", "phi0", "kappa", "gap"]
    assert data[0, 2] == pytest.approx(1.5707963, abs=1e-7)
    raw = (tmp_path / "eig.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_csv_full_precision(tmp_path):
    run(tmp_path, "eig", "--set", "n_modes=2")
    value = (tmp_path / "eig.csv").read_text().splitlines()[1].split(",")[2]
    assert value == "%.17g" % float(value)
    assert abs(float(value) - np.pi / 2) < 1e-12


def test_roundtrip_memoryless(tmp_path):
    assert run(tmp_path, "roundtrip") == 0
    rep = json.loads((tmp_path / "roundtrip.json").read_text())
    assert rep["e0"] <= 1e-4 and rep["e1"] <= 1e-4


def test_gram_identity(tmp_path):
    assert run(tmp_path, "gram", "--set", "horizon=2") == 0
    rep = json.loads((tmp_path / "gram.json").read_text())
    assert set(rep) == {"T", "n_modes", "singular_values", "condition", "min_ratio",
                        "max_ratio", "seed"}
    assert rep["condition"] <= 1 + 1e-6


def test_observe_scan_schema(tmp_path):
    assert run(tmp_path, "observe-scan", "--set", "n_modes=8", "--set", "n_samples=10",
               "--seed", "5") == 0
    rep = json.loads((tmp_path / "observe_scan.json").read_text())
    assert rep["seed"] == 5 and rep["n_modes"] == 8
    assert 0 < rep["min_ratio"] <= rep["max_ratio"]


def test_synthesize_artifacts(tmp_path):
    assert run(tmp_path, "synthesize", "--set", "n_modes=8", *EXP_SET) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep) == {"gram_condition", "max_residual", "cutoff", "modes"}
    assert rep["modes"] == 8 and rep["max_residual"] <= 1e-5
    for name in ("g.csv", "f.csv"):
        header, data = read_csv(tmp_path / name)
        assert header == ["t", "value"] and data.shape == (2001, 2)


def test_simulate_and_observe(tmp_path):
    assert run(tmp_path, "simulate", "--set", "n_modes=8") == 0
    assert read_csv(tmp_path / "trajectory.csv")[0] == ["t", "y_norm_H1_sq", "ydot_norm_H_sq"]
    header, data = read_csv(tmp_path / "terminal.csv")
    assert header == ["n", "a", "adot"] and data.shape == (8, 3)
    assert run(tmp_path, "observe", "--set", "n_modes=8", "--set", "target.type=coefficients",
               "--set", "target.v0=[1,0,0,0,0,0,0,0]", "--set", "target.v1=[0,0,0,0,0,0,0,0]") == 0
    header, data = read_csv(tmp_path / "trace.csv")
    assert np.allclose(data[:, 1], np.sqrt(2) * np.cos(np.pi * data[:, 0] / 2), atol=1e-6)


def test_quasi_per_mode_files(tmp_path):
    assert run(tmp_path, "quasi", "--set", "n_modes=3", *EXP_SET) == 0
    files = sorted(p.name for p in tmp_path.glob("quasi_*.csv"))
    assert files == ["quasi_001.csv", "quasi_002.csv", "quasi_003.csv"]
    header, data = read_csv(tmp_path / "quasi_002.csv")
    assert header[0] == "t" and "abs_E_plus" in header and data.shape[1] == len(header)


def test_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"medium": {"length": 1, "rho": {"const": 4}}, "n_modes": 2}))
    assert main(["eig", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    _, data = read_csv(tmp_path / "eig.csv")
    assert data[0, 2] == pytest.approx(np.pi / 4, abs=1e-9)


@pytest.mark.parametrize("argv", [
    ["eig", "--set", "bogus=1"],
    ["eig", "--set", "kernel.bogus=1"],
    ["eig", "--set", "novalue"],
    ["frobnicate"],
    ["eig", "--threads", "0"],
    ["eig", "--set", "medium.rho.const=-1"],
    ["eig", "--config", "/nonexistent/run.json"],
])
def test_validation_errors_exit_1(argv, tmp_path, capsys):
    assert main([*argv, "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ")


def test_numerical_failure_exit_2(tmp_path, capsys):
    # T < T0 with a vanishing cutoff leaves the Gram hopelessly ill-conditioned
    assert run(tmp_path, "synthesize", "--set", "horizon=1", "--set", "svd_cutoff=1e-17") == 2
    assert capsys.readouterr().err.startswith("error: numerical:")


def test_nonfinite_output_exit_2(tmp_path, capsys):
    # a strongly growing kernel with a long horizon overflows the families
    code = run(tmp_path, "quasi", "--set", "n_modes=1", "--set", "kernel.type=polynomial",
               "--set", "kernel.coeffs=[-1e6]", "--set", "horizon=10", "--set", "dt=0.01")
    assert code == 2
    assert "non-finite" in capsys.readouterr().err


@pytest.mark.parametrize("command, artifact", [("observe-scan", "observe_scan.json"),
                                               ("gram", "gram.json"),
                                               ("roundtrip", "roundtrip.json")])
def test_byte_identical_across_threads(tmp_path, command, artifact):
    outs = []
    for threads in ("1", "4"):
        d = tmp_path / threads
        assert main([command, "--out", str(d), "--threads", threads, "--set", "n_modes=12",
                     "--set", "n_samples=30", "--seed", "42", *EXP_SET]) == 0
        outs.append((d / artifact).read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "memstring", "eig", "--set", "n_modes=1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "eig.csv").exists()
