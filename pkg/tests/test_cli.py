import json
import subprocess
import sys

import pytest

from hamsterwheel import experiment as ex
from hamsterwheel.cli import main

CONFIG_TEXT = """\
hops = 0, 2
qubits = 4
trajectories = 6
shots_per_setting = 30
bootstrap_resamples = 5
seed = 9
output = {out}
format = csv
"""


@pytest.fixture
def config_path(tmp_path):
    out = tmp_path / "results.csv"
    path = tmp_path / "exp.cfg"
    path.write_text(CONFIG_TEXT.format(out=out))
    return path, out


def test_run_writes_results(config_path, capsys):
    path, out = config_path
    assert main(["run", "--config", str(path)]) == 0
    captured = capsys.readouterr()
    assert "kernel backend:" in captured.out
    assert f"wrote {out}" in captured.out
    assert "m=0" in captured.out and "m=2" in captured.out
    echo, rows = ex.load_results(str(out))
    assert [row.m for row in rows] == [0, 2]
    assert echo["seed"] == "9"


def test_run_overrides_take_effect(config_path, tmp_path, capsys):
    path, _ = config_path
    out = tmp_path / "override.json"
    code = main([
        "run", "--config", str(path), "--exact", "--seed", "5",
        "--out", str(out), "--format", "json",
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["seed"] == "5"
    assert payload["config"]["exact"] == "true"
    rows = payload["rows"]
    assert [row["m"] for row in rows] == [0, 2]
    # exact noiseless runs give the ideal figures with zero error bars
    assert rows[1]["negativity"] == pytest.approx(0.5, abs=1e-6)
    assert rows[1]["neg_err"] == 0.0


def test_run_missing_config_file_fails_cleanly(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "absent.cfg")])
    assert code == 1
    captured = capsys.readouterr()
    assert captured.err.startswith("error:")


def test_run_bad_config_fails_cleanly(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("hops = 2\nwheels = 4\n")
    assert main(["run", "--config", str(path)]) == 1
    captured = capsys.readouterr()
    assert "unknown key" in captured.err


def test_unknown_flag_exits_with_usage_error(config_path, capsys):
    path, _ = config_path
    with pytest.raises(SystemExit) as excinfo:
        main(["run", "--config", str(path), "--turbo"])
    assert excinfo.value.code == 2


def test_missing_subcommand_exits_with_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_calibrate_noise_prints_fitted_model(tmp_path, capsys):
    path = tmp_path / "cal.cfg"
    path.write_text(
        "hops = 2\nqubits = 4\ntrajectories = 40\nshots_per_setting = 400\n"
        "bootstrap_resamples = 5\nseed = 13\n"
    )
    code = main([
        "calibrate-noise", "--target-negativity", "0.42",
        "--at-hops", "2", "--config", str(path),
    ])
    assert code == 0
    captured = capsys.readouterr()
    assert "fitted noise model:" in captured.out
    assert "p2 = " in captured.out
    achieved_line = next(
        line for line in captured.out.splitlines()
        if line.startswith("achieved negativity")
    )
    achieved = float(achieved_line.split()[2])
    assert abs(achieved - 0.42) < 0.05


def test_calibrate_noise_unreachable_target_fails(tmp_path, capsys):
    path = tmp_path / "cal.cfg"
    path.write_text(
        "hops = 2\nqubits = 4\ntrajectories = 20\nshots_per_setting = 200\n"
        "bootstrap_resamples = 5\nseed = 13\n"
    )
    code = main([
        "calibrate-noise", "--target-negativity", "0.6",
        "--at-hops", "2", "--config", str(path),
    ])
    assert code == 1
    captured = capsys.readouterr()
    assert captured.err.startswith("error:")


def test_module_entry_point_runs(config_path):
    path, out = config_path
    proc = subprocess.run(
        [sys.executable, "-m", "hamsterwheel", "run", "--config", str(path)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "wrote" in proc.stdout
    assert out.exists()


def test_module_entry_point_reports_errors(tmp_path):
    proc = subprocess.run(
        [
            sys.executable, "-m", "hamsterwheel", "run",
            "--config", str(tmp_path / "nope.cfg"),
        ],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 1
    assert proc.stderr.startswith("error:")
