import json
import subprocess
import sys

import pytest

from fraclab import cli
from fraclab.twobump import ScanTable

BASE = """[problem]
s = 0.5
p = 3
dim = 1
L = 32
n = 512

[scan]
R_list = 2, 4, 6, 8
lambda_grid = 0:1:11
distances = 4:12:5
R = 6
sigma = 2
tau = 3
y_list = 0, 1, 10, 100

[output]
u_inf = {u_inf}
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = d / "run.cfg"
    cfg.write_text(BASE.format(u_inf=d / "lim" / "u_inf.txt"))
    assert cli.run("solve-limit", cfg, d / "lim") == 0
    return d, cfg


def test_solve_limit_outputs(workdir):
    d, _ = workdir
    rep = json.loads((d / "lim" / "u_inf_report.json").read_text())
    assert rep["converged"] and rep["positive"]
    assert rep["metadata"]["command"] == "solve-limit"
    assert (d / "lim" / "u_inf.txt").read_text().startswith("# grid 1 32.0 512")


def test_scan_two_bump_outputs(workdir):
    d, cfg = workdir
    assert cli.run("scan-two-bump", cfg, d / "scan") == 0
    t = ScanTable.read_csv(d / "scan" / "two_bump_scan.csv")
    assert "margin" in t.columns
    assert "empirical_R1" in t.metadata and "prob_hash" in t.metadata
    assert (d / "scan" / "interaction_scan.csv").exists()


@pytest.mark.parametrize("command,artifact", [
    ("c0-bound", "c0_scan.csv"),
    ("verify-decay", "decay.json"),
    ("check-convolution", "convolution.csv"),
    ("check-superadditivity", "superadditivity.json"),
    ("solve", "solution_report.json"),
    ("solve-odd", "odd_solution_report.json"),
])
def test_other_commands(workdir, command, artifact):
    d, cfg = workdir
    out = d / command
    assert cli.run(command, cfg, out) == 0
    assert (out / artifact).exists()


def test_missing_field_names_it(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[problem]\ns = 0.5\ndim = 1\nL = 32\nn = 512\n")
    assert cli.run("solve", cfg, tmp_path / "o") == cli.EXIT_CONFIG
    rec = json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["field"] == "problem.p"
    assert json.loads(capsys.readouterr().err)["error"] == "config-error"


def test_bad_value_and_syntax(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[problem]\ns = half\np = 3\nL = 32\nn = 512\n")
    assert cli.run("solve", cfg, tmp_path / "o") == cli.EXIT_CONFIG
    assert json.loads((tmp_path / "o" / "error.json").read_text())["field"] == "problem.s"
    cfg.write_text("s = 0.5\n")
    assert cli.run("solve", cfg, tmp_path / "o") == cli.EXIT_CONFIG


def test_missing_u_inf_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(BASE.format(u_inf=tmp_path / "nope.txt"))
    assert cli.run("scan-two-bump", cfg, tmp_path / "o") == cli.EXIT_CONFIG


def test_hypothesis_failure(tmp_path):
    cfg = tmp_path / "h.cfg"
    text = BASE.format(u_inf="x").replace("n = 512", "n = 512\nv_family = gaussian\nv_amplitude = -2")
    cfg.write_text(text)
    assert cli.run("solve", cfg, tmp_path / "o") == cli.EXIT_HYPOTHESIS


def test_non_convergence(tmp_path):
    cfg = tmp_path / "nc.cfg"
    cfg.write_text(BASE.format(u_inf="x") + "\n[solver]\nmax_iters = 2\n")
    assert cli.run("solve-limit", cfg, tmp_path / "o") == cli.EXIT_NOT_CONVERGED
    assert (tmp_path / "o" / "u_inf_report.json").exists()
    assert json.loads((tmp_path / "o" / "error.json").read_text())["error"] == "not-converged"


def test_crash_is_distinct(tmp_path, monkeypatch):
    def boom(*a):
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.HANDLERS, "check-convolution", boom)
    cfg = tmp_path / "c.cfg"
    cfg.write_text(BASE.format(u_inf="x"))
    assert cli.run("check-convolution", cfg, tmp_path / "o") == cli.EXIT_CRASH


def test_seed_override_reaches_report(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(BASE.format(u_inf="x"))
    assert cli.run("check-superadditivity", cfg, tmp_path / "o", seed=11) == 0
    assert json.loads((tmp_path / "o" / "superadditivity.json").read_text())["verify_seed"] == 11


def test_parse_list_ranges():
    assert cli.parse_list("0:1:3, 5") == [0.0, 0.5, 1.0, 5.0]


def test_entry_point(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text(BASE.format(u_inf="x"))
    res = subprocess.run([sys.executable, "-m", "fraclab.cli", "check-superadditivity",
                          "--config", str(cfg), "--out-dir", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
