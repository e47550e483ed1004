import json

from acmf.harness.cli import main
from acmf.types import codes

TINY_TOML = """\
name = "tiny_cli"

[grid]
d = 2
n = 64

[physics]
eps = 0.0625
R0 = 0.3
R1 = 0.9
delta1 = 0.01
t_end = 0.002
record_every = 10

[initial.shape]
kind = "ball"
center = [0.5, 0.5]
radius = 0.3

[diagnostics]
monotonicity_s = 0.02

[output]
meshes = false
"""


def _write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_validate_bundled_scenario(capsys):
    assert main(["validate", "obstacle_pin"]) == codes.ExitOk
    assert "obstacle_pin: valid" in capsys.readouterr().out


def test_validate_lists_every_problem(tmp_path, capsys):
    path = _write(tmp_path, TINY_TOML.replace("n = 64", "n = 32").replace("R0 = 0.3", "R0 = 0.2"))
    assert main(["validate", str(path)]) == codes.ExitConfig
    err = capsys.readouterr().err
    assert "4h" in err
    assert "R0/4" in err
    assert err.count(codes.ValidationError) >= 2


def test_validate_malformed_file(tmp_path):
    path = _write(tmp_path, "[grid\n")
    assert main(["validate", str(path)]) == codes.ExitConfig
    assert main(["validate", str(tmp_path / "missing.toml")]) == codes.ExitConfig


def test_run_and_extract(tmp_path, capsys):
    path = _write(tmp_path, TINY_TOML)
    out = tmp_path / "run"
    assert main(["run", str(path), "-o", str(out)]) == codes.ExitOk
    assert "tiny_cli: ok (4 records" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_code"] == 0
    assert not (out / "meshes").exists()

    snapshot = out / "snapshots" / "step_00000030.acmf"
    vtk = tmp_path / "final.vtk"
    assert main(["extract", str(snapshot), "-o", str(vtk)]) == codes.ExitOk
    assert vtk.read_text().startswith("# vtk DataFile Version 3.0")


def test_run_reports_solver_failures(tmp_path, capsys):
    unstable = TINY_TOML.replace("t_end = 0.002", "t_end = 0.002\ndt_override = 0.01\nenforce_cfl = false")
    path = _write(tmp_path, unstable)
    assert main(["run", str(path), "-o", str(tmp_path / "run")]) == codes.ExitSolver
    assert codes.MaxPrincipleViolation in capsys.readouterr().err


def test_extract_rejects_garbage(tmp_path):
    path = _write(tmp_path, "not a snapshot", name="bad.acmf")
    assert main(["extract", str(path), "-o", str(tmp_path / "bad.vtk")]) == codes.ExitConfig
