import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).parent.parent

DIRECT = """\
mode = {mode}

[params]
g = 0.41
kappa = 14.29
gamma = 1.93e-4
eta = 0.0205

[drive]
delta = -1.0
delta_c = 0.0
omega = {omega}

[numerics]
n_trap = 3
t_end = 20
record_every = 10

[sweep]
delta_min = -2
delta_max = 0
delta_points = 3
delta_c_min = -10
delta_c_max = 10
delta_c_points = 3
"""


@pytest.fixture()
def run_cli(tmpdir):
    def run(subcommand, text, *flags):
        config = os.path.join(tmpdir, "run.ini")
        with open(config, "w", encoding="utf-8") as f:
            f.write(text)
        return subprocess.run(
            [sys.executable, "cavity_cool.py", subcommand, "--config", config, "--quiet", *flags],
            cwd=ROOT,
            env=os.environ.copy(),
            capture_output=True,
            text=True,
        )

    return run


def _rows(path):
    with open(path, encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _error_line(proc):
    return json.loads(proc.stderr.strip().splitlines()[-1])


def test_molecule_table(run_cli, tmpdir):
    proc = run_cli("molecule", "mode = molecule\n", "--out", str(tmpdir))
    assert proc.returncode == 0, proc.stderr
    rows = {row["name"]: row for row in _rows(os.path.join(tmpdir, "molecules.csv"))}
    assert len(rows) == 7
    assert float(rows["COS"]["cooperativity"]) == pytest.approx(61, rel=0.05)
    assert rows["CSCl2"]["source_anomaly"] == "yes"
    assert os.path.isfile(os.path.join(tmpdir, "manifest.ini"))


def test_simulate_without_drive_is_flat(run_cli, tmpdir):
    proc = run_cli("simulate", DIRECT.format(mode="simulate", omega=0.0), "--out", str(tmpdir))
    assert proc.returncode == 0, proc.stderr
    rows = _rows(os.path.join(tmpdir, "trajectory.csv"))
    assert len(rows) == 11
    first, last = rows[0], rows[-1]
    for n in range(3):
        assert float(last[f"p_{n}"]) == pytest.approx(float(first[f"p_{n}"]), abs=1e-9)


def test_perturbative_sweep_with_heatmaps(run_cli, tmpdir):
    proc = run_cli("sweep", DIRECT.format(mode="sweep", omega=0.05), "--out", str(tmpdir), "--method", "perturbative", "--svg")
    assert proc.returncode == 0, proc.stderr
    rows = _rows(os.path.join(tmpdir, "sweep.csv"))
    assert len(rows) == 9
    assert {row["status"] for row in rows} == {"ok"}
    for name in ("sweep_w.svg", "sweep_n_st.svg", "manifest.ini"):
        assert os.path.getsize(os.path.join(tmpdir, name)) != 0


def test_manifest_reproduces_run(run_cli, tmpdir):
    first = os.path.join(tmpdir, "first")
    second = os.path.join(tmpdir, "second")
    proc = run_cli("rates", DIRECT.format(mode="rates", omega=0.05), "--out", first, "--method", "perturbative")
    assert proc.returncode == 0, proc.stderr
    manifest = Path(first, "manifest.ini").read_text(encoding="utf-8")
    proc = run_cli("rates", manifest, "--out", second)
    assert proc.returncode == 0, proc.stderr
    assert Path(first, "rates.csv").read_bytes() == Path(second, "rates.csv").read_bytes()


def test_config_error_exit_code(run_cli, tmpdir):
    proc = run_cli("rates", "mode = rates\nfoo = 1\n", "--out", str(tmpdir))
    assert proc.returncode == 2
    error = _error_line(proc)
    assert error["kind"] == "ConfigError"
    assert error["exit_code"] == 2
    assert "line 2" in error["error"]
    assert not os.path.exists(os.path.join(tmpdir, "rates.csv"))


def test_subcommand_must_match_mode(run_cli, tmpdir):
    proc = run_cli("sweep", DIRECT.format(mode="rates", omega=0.05), "--out", str(tmpdir))
    assert proc.returncode == 2
    assert "does not match" in _error_line(proc)["error"]


def test_numerical_error_exit_code(run_cli, tmpdir):
    text = DIRECT.format(mode="rates", omega=0.05).replace("gamma = 1.93e-4", "gamma = 0").replace("g = 0.41", "g = 0")
    proc = run_cli("rates", text, "--out", str(tmpdir), "--method", "perturbative")
    assert proc.returncode == 3
    assert _error_line(proc)["kind"] == "DegenerateSteadyStateError"
