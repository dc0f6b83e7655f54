import json
import math
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ.get("RYDGATE_BIN", "rydgate")

FAST_CONFIG = """
# fast scenario for CLI plumbing tests
frame = effective
rtol = 1e-8
grid_points = 1025
trace_points = 33
"""


def run(*args, check=True):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"{args} exited {proc.returncode}: {proc.stdout} {proc.stderr}"
        )
    return proc


def write_config(tmp_path, text=FAST_CONFIG, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def manifest(outdir):
    return json.loads((Path(outdir) / "manifest.json").read_text())


def test_design_outputs(tmp_path):
    out = tmp_path / "design"
    run("design", "--config", write_config(tmp_path), "--out", str(out))
    pulse = (out / "pulse.csv").read_text().splitlines()
    assert pulse[0] == "t,omega_x,omega_y,omega_a,phi_a,mu1,mu2"
    assert len(pulse) == 1 + 1025
    m = manifest(out)
    assert abs(m["summary"]["omega_max_T"] - 36.05) < 0.2
    # physical peak about 2pi x 0.27 MHz at T = 21.5 us
    assert m["summary"]["omega_max_rad_per_s"] == pytest.approx(
        2 * math.pi * 0.27e6, rel=0.02
    )
    assert m["summary"]["q_s_closed_form"] < 1e-10


def test_design_rejects_bad_config(tmp_path):
    cfg = write_config(tmp_path, "unknown_knob = 3\n")
    proc = run("design", "--config", cfg, "--out", str(tmp_path / "x"), check=False)
    assert proc.returncode == 2
    assert "unknown_knob" in proc.stderr


def test_simulate_effective_frame(tmp_path):
    out = tmp_path / "sim"
    run("simulate", "--config", write_config(tmp_path), "--out", str(out))
    report = json.loads((out / "report.json").read_text())
    assert report["fidelity"] > 0.99
    fidelity = (out / "fidelity.csv").read_text().splitlines()
    assert fidelity[0] == "t,average-gate"
    assert len(fidelity) == 1 + 33
    for line in fidelity[1:]:
        value = float(line.split(",")[1])
        assert -1e-9 <= value <= 1 + 1e-9
    assert (out / "populations.csv").exists()
    assert (out / "phases.csv").exists()


def strip_timing(csv_text):
    """Drop the runtime column: the only non-deterministic field."""
    rows = [line.split(",") for line in csv_text.splitlines()]
    idx = rows[0].index("runtime_s")
    return ["," .join(r[:idx] + r[idx + 1:]) for r in rows]


def test_reproducible_outputs(tmp_path):
    cfg = write_config(tmp_path)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        run("sweep", "--config", cfg, "--out", str(out), "--channel",
            "epsilon", "--from", "-0.05", "--to", "0.05", "--points", "3")
    assert strip_timing((out_a / "sweep.csv").read_text()) == strip_timing(
        (out_b / "sweep.csv").read_text()
    )
    m = manifest(out_a)
    assert m["rows"] == 3
    assert m["config_hash"] == manifest(out_b)["config_hash"]
    # pulse export is fully deterministic
    for out in (out_a, out_b):
        run("design", "--config", cfg, "--out", str(out / "d"))
    assert (out_a / "d" / "pulse.csv").read_bytes() == (
        out_b / "d" / "pulse.csv"
    ).read_bytes()


def test_sweep_rejects_bad_channel(tmp_path):
    proc = run("sweep", "--config", write_config(tmp_path), "--out",
               str(tmp_path / "s"), "--channel", "volume", "--from", "0",
               "--to", "1", "--points", "2", check=False)
    assert proc.returncode == 2


def test_montecarlo_summary(tmp_path):
    out = tmp_path / "mc"
    run("montecarlo", "--config", write_config(tmp_path), "--out", str(out),
        "--snr", "10", "--runs", "3", "--seed", "5")
    rows = (out / "montecarlo.csv").read_text().splitlines()
    assert rows[0] == "run,seed,infidelity,runtime_s,status"
    assert len(rows) == 1 + 3
    m = manifest(out)
    assert m["summary"]["completed"] == 3
    assert m["summary"]["mean_infidelity"] >= 0.0


def test_montecarlo_disabled_noise_is_deterministic(tmp_path):
    # With the default snr = inf every run equals the clean baseline.
    out = tmp_path / "mc0"
    run("montecarlo", "--config", write_config(tmp_path), "--out", str(out),
        "--runs", "2")
    rows = (out / "montecarlo.csv").read_text().splitlines()[1:]
    infidelities = {r.split(",")[2] for r in rows}
    assert len(infidelities) == 1
    m = manifest(out)
    assert m["summary"]["std_infidelity"] == 0.0


def test_truthtable(tmp_path):
    out = tmp_path / "tt"
    run("truthtable", "--config", write_config(tmp_path), "--out", str(out))
    m = manifest(out)
    assert m["summary"]["min_success"] > 0.999
    table = (out / "truth_table.txt").read_text().splitlines()
    assert len(table) == 4


def test_phases(tmp_path):
    out = tmp_path / "ph"
    run("phases", "--config", write_config(tmp_path), "--out", str(out))
    lines = (out / "phases.csv").read_text().splitlines()
    assert lines[0] == "t,theta2,Theta2"
    m = manifest(out)
    assert m["summary"]["Theta2_final"] == pytest.approx(math.pi, abs=1e-6)
    assert m["summary"]["theta2_final_propagated"] == pytest.approx(0.0, abs=1e-6)


def test_certificate_failure_is_a_numerical_error(tmp_path):
    # A deliberately coarse exponential stepper cannot hold the certificate.
    cfg = write_config(
        tmp_path,
        "integrator = expm\nexpm_points_per_period = 4\ntrace_points = 9\n",
        name="coarse.cfg",
    )
    out = tmp_path / "coarse"
    proc = run("simulate", "--config", cfg, "--out", str(out), "--certify",
               check=False)
    assert proc.returncode == 3
    assert "certificate" in proc.stderr
