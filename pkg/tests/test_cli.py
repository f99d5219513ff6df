import csv

import numpy as np
import pytest

from peridyn_rk import cli
from peridyn_rk.exceptions import StagnationError


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_weights_command(tmp_path, capsys):
    assert cli.main(["weights", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "weights.csv")
    assert len(rows) == 48
    assert all(float(r["weight"]) > 0 for r in rows)
    out = capsys.readouterr().out
    assert "NOTICE" in out and "state-term constant" in out


def test_converge_command_and_determinism(tmp_path, capsys):
    args = ["converge", "--coupling", "h", "--ladder", "1/8,1/16,1/32,1/64"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    out = capsys.readouterr().out
    assert "least-squares slope" in out
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "converge_h.csv").read_text()
    assert a == (tmp_path / "b" / "converge_h.csv").read_text()
    rows = _rows(tmp_path / "a" / "converge_h.csv")
    assert len(rows) == 4
    assert all(r["wall_seconds"] == "NA" for r in rows)
    assert "config_hash" in a


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.cfg"
    conf.write_text("h_max = 1/4\ndelta = 1/4\n")
    assert cli.main(["solve", "--config", str(conf), "--h-max", "1/8", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "solution.csv")
    xs = sorted({float(r["x1"]) for r in rows})
    assert xs[1] - xs[0] == pytest.approx(1 / 8)


def test_symbols_command(tmp_path, capsys):
    args = ["symbols", "--scan-deltas", "0.25", "--resolution", "7", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    assert "all positive: True" in capsys.readouterr().out
    assert cli.main(args + ["--nu", "0.2", "--allow-lambda-lt-mu"]) == 0
    assert "WARNING" in capsys.readouterr().out


def test_truncation_command(tmp_path):
    assert cli.main(["truncation", "--ladder", "1/8,1/16,1/32", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "truncation.csv")
    assert {r["coupling"] for r in rows} == {"uniform", "asymptotic", "quasi"}
    assert len(rows) == 9


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--unknown-key", "3"],
        ["solve", "--nu", "0.2"],
        ["solve", "--delta"],
        ["converge", "--ladder", "1/8,1/16"],
        ["solve", "stray"],
    ],
)
def test_config_errors_exit_2(args, tmp_path, capsys):
    assert cli.main(args + ["--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_thread_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("PERIDYN_THREADS", "zero")
    assert cli.main(["weights", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("PERIDYN_THREADS", "1")
    assert cli.main(["weights", "--out", str(tmp_path)]) == 0


def test_numerical_error_exit_3(tmp_path, monkeypatch, capsys):
    def stall(*args, **kwargs):
        raise StagnationError("no progress")

    monkeypatch.setattr(cli, "solve_case", stall)
    assert cli.main(["solve", "--out", str(tmp_path)]) == 3
    assert "StagnationError" in capsys.readouterr().err


def test_solution_csv_matches_solver(tmp_path):
    assert cli.main(["solve", "--h-max", "1/8", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "solution.csv")
    vals = np.array([[float(r["c1"]), float(r["c2"])] for r in rows])
    assert np.all(np.isfinite(vals))
