import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from dispatchkit.cli import (
    EXIT_BELOW_MINIMUM,
    EXIT_DEFICIT,
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_PARSE,
    main,
)
from dispatchkit.problem_io import dumps_problem

REF = "builtin:reference"
GOLDEN_300 = [60.0, 63.75, 62.75, 55.25, 58.25]


def _table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


@pytest.mark.parametrize(
    "demand, regime, code",
    [(None, "Deficit", EXIT_DEFICIT), ("500", "EqualityFeasible", EXIT_OK), ("0", "BelowMinimum", EXIT_BELOW_MINIMUM)],
)
def test_check(capsys, demand, regime, code):
    argv = ["check", REF] + (["--demand", demand] if demand else [])
    assert main(argv) == code
    out = capsys.readouterr().out
    assert f"regime: {regime}\n" in out
    assert "capacity_min_kwh: 150.000000" in out and "capacity_max_kwh: 500.000000" in out


def test_check_deficit_explains(capsys):
    main(["check", REF])
    assert "exceeds total capacity" in capsys.readouterr().out


def test_solve_multi_full_cost_weight(capsys):
    assert main(["solve", REF, "--mode", "multi", "--lambda", "1"]) == EXIT_OK
    cap = capsys.readouterr()
    header, rows = _table(cap.out)
    assert rows[0][:5] == [30.0] * 5
    assert "kkt_residual:" in cap.err
    assert "PC1=AtLower" in cap.err


def test_solve_resilience_deficit(capsys):
    assert main(["solve", REF, "--mode", "resilience"]) == EXIT_OK
    header, rows = _table(capsys.readouterr().out)
    assert rows[0][header.index("total_energy_kwh")] == 500.0


def test_solve_cost_matches_grid_golden(capsys):
    assert main(["solve", REF, "--mode", "cost", "--demand", "300"]) == EXIT_OK
    _, rows = _table(capsys.readouterr().out)
    np.testing.assert_allclose(rows[0][:5], GOLDEN_300, atol=0.25)


def test_solve_is_deterministic(capsys):
    main(["solve", REF, "--mode", "cost", "--demand", "321.5"])
    a = capsys.readouterr().out
    main(["solve", REF, "--mode", "cost", "--demand", "321.5"])
    assert capsys.readouterr().out == a


def test_solve_infeasible(capsys):
    assert main(["solve", REF, "--mode", "cost"]) == EXIT_INFEASIBLE
    assert "exceeds total capacity" in capsys.readouterr().err


def test_numerical_failure(capsys, monkeypatch):
    from dispatchkit import cli
    from dispatchkit.core import ConvergenceError

    def boom(problem, cfg):
        raise ConvergenceError("no bracket")

    monkeypatch.setitem(cli._SOLVERS, "cost", boom)
    assert main(["solve", REF, "--mode", "cost", "--demand", "300"]) == EXIT_NUMERICAL
    assert "numerical failure: no bracket" in capsys.readouterr().err


def test_env_tolerance_is_validated(monkeypatch):
    monkeypatch.setenv("DISPATCHKIT_TOL", "-1")
    assert main(["check", REF]) == EXIT_PARSE


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("horizon_h = 1\n")
    assert main(["check", str(bad)]) == EXIT_PARSE
    assert "demand_kwh: missing required field" in capsys.readouterr().err
    assert main(["solve", REF, "--mode", "nonsense"]) == EXIT_PARSE
    assert main(["solve", REF, "--lambda", "3"]) == EXIT_PARSE
    assert main([]) == EXIT_PARSE


def test_sweep_lambda_files(tmp_path, capsys):
    out, plot = tmp_path / "lam.csv", tmp_path / "lam.svg"
    code = main(["sweep", REF, "--param", "lambda", "--start", "0", "--stop", "1", "--step", "0.001",
                 "--out", str(out), "--plot", str(plot)])
    assert code == EXIT_OK
    header, rows = _table(out.read_text())
    assert header[0] == "lambda" and len(rows) == 1001
    at_min = [r[0] for r in rows if r[1:6] == [30.0] * 5]
    assert 0.085 <= at_min[0] <= 0.095
    svg = plot.read_text()
    assert svg.count("<g id=\"line2d_") >= 5
    for cid in ("PC1", "PC2", "PC3", "PC4", "PC5"):
        assert cid in svg


def test_sweep_demand_rows(tmp_path):
    out = tmp_path / "dem.csv"
    assert main(["sweep", REF, "--param", "demand", "--start", "150", "--stop", "500", "--step", "10",
                 "--out", str(out)]) == EXIT_OK
    _, rows = _table(out.read_text())
    assert len(rows) == 36
    assert rows[0][1:6] == [30.0] * 5
    assert rows[-1][1:6] == [60.0, 100.0, 125.0, 85.0, 130.0]


def test_sweep_demand_defaults_to_capacity_range(capsys):
    assert main(["sweep", REF, "--param", "demand"]) == EXIT_OK
    _, rows = _table(capsys.readouterr().out)
    assert rows[0][0] == 150.0 and rows[-1][0] == 500.0


def test_sweep_outside_range(capsys):
    assert main(["sweep", REF, "--param", "demand", "--start", "100", "--stop", "200", "--step", "10"]) == EXIT_INFEASIBLE
    assert "100" in capsys.readouterr().err


def test_sweep_unwritable(tmp_path):
    assert main(["sweep", REF, "--param", "lambda", "--step", "0.1",
                 "--out", str(tmp_path / "no" / "x.csv")]) == EXIT_IO


def test_pareto(tmp_path):
    out, plot = tmp_path / "front.csv", tmp_path / "front.svg"
    assert main(["pareto", REF, "--grid-size", "101", "--out", str(out), "--plot", str(plot)]) == EXIT_OK
    header, rows = _table(out.read_text())
    assert header == ["lambda", "lambda_end", "total_cost", "total_energy_kwh"]
    assert rows[0][0] == 0.0 and rows[0][3] == 500.0
    assert rows[-1][1] == 1.0 and rows[-1][3] == 150.0
    for a in rows:
        for b in rows:
            assert not (b[2] < a[2] and b[3] > a[3])
    transition = [r[0] for r in rows[1:-1]]
    assert 0.046 <= transition[0] and transition[-1] <= 0.093
    assert plot.read_text().startswith("<?xml")


def test_pareto_grid_too_small():
    assert main(["pareto", REF, "--grid-size", "1"]) == EXIT_PARSE


def test_plots_are_reproducible(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    main(["sweep", REF, "--param", "demand", "--out", str(tmp_path / "t.csv"), "--plot", str(a)])
    main(["sweep", REF, "--param", "demand", "--out", str(tmp_path / "t.csv"), "--plot", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_user_problem_file(tmp_path, fleet, capsys):
    path = tmp_path / "fleet.toml"
    path.write_text(dumps_problem(fleet.with_demand(500.0)))
    assert main(["check", str(path)]) == EXIT_OK


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dispatchkit", "check", REF, "--demand", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_BELOW_MINIMUM
    assert "BelowMinimum" in proc.stdout
