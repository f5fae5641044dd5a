import subprocess
import sys

import numpy as np
import pytest

from elevform.cli import main
from elevform.output import csv_header, read_csv_log
from elevform.scenario_io import load_scenario, loads_scenario, dumps_scenario
from conftest import scenario_path

SHORT_TETRA = None


@pytest.fixture()
def short_scenario_file(tmp_path):
    sc = load_scenario(scenario_path("tetrahedron"))
    text = dumps_scenario(sc).replace("t_end = 30", "t_end = 2")
    path = tmp_path / "short_tetra.cfg"
    path.write_text(text)
    return str(path)


COLLImNEAR = """
[formation]
dimension = 2
rho = 0.15
n = 3
n_leaders = 2
edges =
    1 2
    2 3
desired_distances = 1 1

[gains]
kp = 1
ke = 1
alpha = 0.5

[initial]
p1 = 0 0 0
p2 = 1 0 0
p3 = 2 0 0
"""


def test_run_writes_outputs(short_scenario_file, tmp_path, capsys):
    outdir = tmp_path / "out"
    code = main(["run", short_scenario_file, "-o", str(outdir)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "rigidity (desired) : rank 6/6" in printed
    log_csv = outdir / "short_tetra_log.csv"
    assert log_csv.exists()
    with open(log_csv) as fh:
        assert fh.readline().strip() == csv_header(4, 6)
    back = read_csv_log(log_csv)
    assert back["t"][-1] == pytest.approx(2.0)
    assert (outdir / "short_tetra_trajectories.csv").exists()
    assert (outdir / "short_tetra_errors.csv").exists()


def test_check_rigidity_ok(capsys):
    code = main(["check-rigidity", scenario_path("tetrahedron")])
    assert code == 0
    assert "rank 6/6 -> rigid" in capsys.readouterr().out


def test_check_rigidity_rejects_collinear(tmp_path, capsys):
    path = tmp_path / "collinear.cfg"
    path.write_text(COLLImNEAR)
    code = main(["check-rigidity", str(path)])
    assert code == 1
    assert "NOT rigid" in capsys.readouterr().out


def test_echo_round_trips(capsys):
    code = main(["echo", scenario_path("hexagon")])
    assert code == 0
    text = capsys.readouterr().out
    sc = loads_scenario(text)
    assert sc.graph.n == 6
    assert dumps_scenario(sc) == text


def test_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(open(scenario_path("tetrahedron")).read().replace("alpha = 0.5", "alpha = 2"))
    code = main(["run", str(bad), "-o", str(tmp_path / "o")])
    assert code == 1
    assert "alpha" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[formation\nnope")
    code = main(["run", str(bad), "-o", str(tmp_path / "o")])
    assert code == 1


def test_geometry_fault_exit_code(tmp_path, capsys):
    # balls large enough to collide during the transient
    text = open(scenario_path("tetrahedron")).read().replace(
        "rho = 0.25", "rho = 0.45").replace(
        "desired_distances = 1 1 1 1 1 1", "desired_distances = 1 1 1 1 1 1")
    path = tmp_path / "overlap.cfg"
    path.write_text(text)
    code = main(["run", str(path), "-o", str(tmp_path / "o")])
    assert code == 2
    assert "overlap" in capsys.readouterr().err


def test_sweep_runs_all(short_scenario_file, tmp_path, capsys):
    sc = load_scenario(scenario_path("hexagon"))
    text = dumps_scenario(sc).replace("t_end = 30", "t_end = 2")
    other = tmp_path / "short_hexagon.cfg"
    other.write_text(text)
    outdir = tmp_path / "sweep_out"
    code = main(["sweep", short_scenario_file, str(other), "-o", str(outdir), "-j", "2"])
    assert code == 0
    assert (outdir / "short_tetra_log.csv").exists()
    assert (outdir / "short_hexagon_log.csv").exists()
    out = capsys.readouterr().out
    assert out.count("=== ") == 2


def test_sweep_reports_bad_file(short_scenario_file, tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("not a scenario")
    code = main(["sweep", short_scenario_file, str(bad), "-o", str(tmp_path / "o"), "-j", "1"])
    assert code == 1


def test_console_entry_point(short_scenario_file):
    proc = subprocess.run(
        [sys.executable, "-m", "elevform.cli", "echo", short_scenario_file],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "[formation]" in proc.stdout
