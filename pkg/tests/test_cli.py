import subprocess
import sys

import numpy as np
import pytest

from imzero import bench
from imzero.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY,
    UsageError,
    build_objective,
    main,
    parse_projection,
    parse_stepsize,
)
from imzero.solver import Ball, Box, Fixed, NoProjection, Stepsize


def data_section(path):
    # everything except the line naming the stored data file
    return [l for l in path.read_text().splitlines() if not l.startswith("# data=")]


def test_run_example(tmp_path):
    out = tmp_path / "t.csv"
    argv = ["run", "--objective", "quadratic:n=100", "--oracle", "cs", "--delta", "1e-16",
            "--iters", "100000", "--stepsize", "cs-convex", "--seed", "7", "--out", str(out)]
    assert main(argv) == EXIT_OK
    header, trials = bench.read_trace_csv(out)
    assert header["seed"] == "7" and header["oracle"] == "cs"
    assert trials[0]["k"][-1] == 100000 and len(trials[0]["k"]) == 1001
    assert (tmp_path / "t.csv.meta.json").exists()


def test_run_is_repeatable(tmp_path):
    argv = ["run", "--objective", "pseudo-huber:m=4,n=2", "--oracle", "gs-cd", "--delta", "1e-6",
            "--stepsize", "gs", "--iters", "2000", "--trials", "3", "--seed", "11"]
    assert main(argv + ["--out", str(tmp_path / "a.csv")]) == EXIT_OK
    assert main(argv + ["--out", str(tmp_path / "b.csv")]) == EXIT_OK
    assert data_section(tmp_path / "a.csv") == data_section(tmp_path / "b.csv")
    assert (tmp_path / "a.csv.data.txt").read_bytes() == (tmp_path / "b.csv.data.txt").read_bytes()


def test_run_options(tmp_path):
    out = tmp_path / "r.csv"
    argv = ["run", "--objective", "rosenbrock", "--stepsize", "cs-nonconvex", "--delta", "1e-10",
            "--project", "ball=1.4142135623730951", "--x0", "2;2", "--iters", "50", "--stride", "5",
            "--schedule", "harmonic", "--out", str(out)]
    assert main(argv) == EXIT_OK
    text = out.read_text()
    assert "x0_projected=true" in text and "# projection=ball=1.4142135623730951" in text
    _, trials = bench.read_trace_csv(out)
    assert list(trials[0]["k"]) == list(range(0, 50, 5)) + [50]
    assert trials[0]["delta_k"][2] == 1e-10 / 11


def test_run_with_data_file(tmp_path):
    M = np.column_stack([np.eye(3), [1.0, 2.0, 3.0]])
    np.savetxt(tmp_path / "d.txt", M)
    out = tmp_path / "o.csv"
    assert main(["run", "--objective", f"pseudo-huber:data={tmp_path / 'd.txt'},lam=0.1,mu=0.5",
                 "--iters", "20", "--delta", "1e-3", "--out", str(out)]) == EXIT_OK
    saved = np.loadtxt(tmp_path / "o.csv.data.txt")
    assert np.array_equal(saved, M)


def test_verify_reports_failure_code(tmp_path, capsys):
    # the literal fourth-order excess check fails by design, see README
    code = main(["verify", "--samples", "20000", "--out", str(tmp_path)])
    assert code == EXIT_VERIFY
    table = capsys.readouterr().out
    assert "FAIL" in table and "PASS" in table
    assert (tmp_path / "verify_points.csv").exists() and (tmp_path / "verify_summary.csv").exists()


def test_suite_deriv_sweep(tmp_path):
    assert main(["suite", "deriv-sweep", "--out", str(tmp_path / "figs")]) == EXIT_OK
    assert len(list((tmp_path / "figs").glob("*.csv"))) == 3


@pytest.mark.parametrize("argv", [
    ["run", "--objective", "quadratic:n=2", "--oracle", "fd", "--out", "x.csv"],
    ["run", "--objective", "nope", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2,q=1", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--stepsize", "huge", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--project", "disk=1", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--x0", "1;2;3", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--iters", "5", "--stride", "9", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--iters", "0", "--out", "x.csv"],
    ["run", "--objective", "quadratic:n=2", "--seed", "-1", "--out", "x.csv"],
    ["run", "--objective", "pseudo-huber:mu=0.01", "--delta", "0.5", "--out", "x.csv"],
    ["suite", "figure-9"],
    ["dance"],
    [],
])
def test_usage_errors(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE
    assert not (tmp_path / "x.csv").exists()


def test_numeric_abort(tmp_path):
    out = tmp_path / "x.csv"
    code = main(["run", "--objective", "quadratic:n=2", "--stepsize", "fixed=1e300",
                 "--x0", "1;1", "--out", str(out)])
    assert code == EXIT_NUMERIC


def test_unknown_oracle_prints_usage():
    proc = subprocess.run([sys.executable, "-m", "imzero", "run", "--objective", "quadratic",
                           "--oracle", "magic", "--out", "x.csv"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage:" in proc.stderr and "magic" in proc.stderr


def test_parsers():
    assert parse_stepsize("gs") is Stepsize.GS
    assert parse_stepsize("fixed=0.25") == Fixed(0.25)
    with pytest.raises(UsageError):
        parse_stepsize("fixed=abc")
    assert isinstance(parse_projection("none", 3), NoProjection)
    box = parse_projection("box=-1:2", 3)
    assert isinstance(box, Box) and np.array_equal(box.hi, [2.0, 2.0, 2.0])
    assert isinstance(parse_projection("ball=2", 3), Ball)
    with pytest.raises(UsageError):
        parse_projection("box=1", 3)


def test_build_objective_variants():
    assert build_objective("worst:n=7,L=2", 0).n == 7
    assert build_objective("boxqp:c=1.5;-0.2", 0).optimum[0].tolist() == [1.0, -0.2]
    assert build_objective("boxqp:n=4", 3).n == 4
    assert build_objective("mpc:L1=exact", 0).L1 < 4e4
    assert build_objective("logistic:m=30,n=3", 0).n == 3
    assert build_objective("polynomial:coeffs=0;0;0;1", 0).degree == 3
    with pytest.raises(UsageError):
        build_objective("worst:n", 0)
    with pytest.raises(UsageError):
        build_objective("worst:n=two", 0)
