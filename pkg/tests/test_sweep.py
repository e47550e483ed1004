import json
import logging
import math

import pytest

from acmf.harness.config import bundled_scenario, load_config, parse_config
from acmf.harness.sweep import (
    SweepRow,
    _trends,
    convergence_sweep,
    entry_config,
    exact_radius,
    worker_count,
)
from acmf.types import codes


def _circle_base(tmp_path, keep_density=False):
    document = load_config(bundled_scenario("shrinking_circle")).model_dump()
    if not keep_density:
        document["diagnostics"]["density_point"] = None
        document["diagnostics"]["density_radii"] = []
    document["output"].update({"directory": str(tmp_path), "snapshots": False, "meshes": False})
    return parse_config(document)


def test_entry_config_keeps_the_ratio(tmp_path):
    entry = entry_config(_circle_base(tmp_path), 0.04, 8.0, 0.005, tmp_path)
    assert entry.grid.n == 200
    assert entry.physics.eps == 0.04
    assert entry.physics.t_end == 0.005
    assert entry.physics.dt_override is None
    assert entry.name == "shrinking_circle_eps0.04"
    assert entry.output.directory == str(tmp_path / "eps_0.04")


def test_exact_radius():
    assert exact_radius(0.25, 2, 0.01) == pytest.approx(math.sqrt(0.0425))
    assert exact_radius(0.3, 3, 0.005) == pytest.approx(math.sqrt(0.07))
    assert exact_radius(0.1, 2, 1.0) == 0.0


def test_trends():
    rows = [
        SweepRow(eps=0.02, n=400, radius_error=0.02, discrepancy=0.4),
        SweepRow(eps=0.08, n=100, radius_error=0.1, discrepancy=0.5),
        SweepRow(eps=0.04, n=200, radius_error=0.05, discrepancy=0.3),
    ]
    assert _trends(rows) == {"radius_error_decreasing": True, "discrepancy_decreasing": False}
    assert _trends(rows[:1]) == {}
    failed = SweepRow(eps=0.01, n=800, exit_code=2, error="rejected")
    assert _trends(rows[1:] + [failed]) == {"radius_error_decreasing": True, "discrepancy_decreasing": True}
    partial = [SweepRow(eps=0.08, n=100, discrepancy=0.5), SweepRow(eps=0.04, n=200, discrepancy=0.3)]
    assert _trends(partial) == {"discrepancy_decreasing": True}


def test_worker_count(monkeypatch, caplog):
    monkeypatch.setenv("ACMF_THREADS", "2")
    assert worker_count(8) == 2
    assert worker_count(1) == 1
    monkeypatch.setenv("ACMF_THREADS", "many")
    with caplog.at_level(logging.WARNING, logger="acmf.harness.sweep"):
        assert worker_count(8) == 8
    assert "ACMF_THREADS" in caplog.text
    monkeypatch.delenv("ACMF_THREADS")
    assert worker_count(3) == 3
    assert worker_count() >= 1


def test_rejected_entries_become_rows(tmp_path):
    # density radii 0.08 and 0.12 are thinner than 3 eps = 0.24
    table = convergence_sweep(_circle_base(tmp_path, keep_density=True), [0.08], workers=1)
    assert len(table.rows) == 1
    row = table.rows[0]
    assert row.exit_code == codes.ExitConfig
    assert "density_radii" in row.error
    assert table.trends == {}
    assert (tmp_path / "sweep.csv").exists()


def test_single_entry_sweep(tiny_document, tmp_path):
    base = parse_config(tiny_document(output={"snapshots": False, "meshes": False}))
    table = convergence_sweep(base, [0.0625], ratio=4.0, directory=tmp_path / "sweep", workers=1)
    assert table.trends == {}
    (row,) = table.rows
    assert row.n == 64
    assert row.exit_code == 0, row.error
    assert row.radius_error is not None and row.radius_error < 0.05
    assert row.C2 is not None
    saved = json.loads((tmp_path / "sweep" / "sweep.json").read_text())
    assert saved["rows"][0]["n"] == 64
    assert (tmp_path / "sweep" / "eps_0.0625" / "summary.json").exists()


@pytest.mark.slow
def test_convergence_sweep(tmp_path):
    table = convergence_sweep(_circle_base(tmp_path), [0.08, 0.04, 0.02], time=0.005, workers=1)
    assert [row.n for row in table.rows] == [100, 200, 400]
    assert all(row.exit_code == 0 for row in table.rows), [row.error for row in table.rows]
    assert table.trends == {"radius_error_decreasing": True, "discrepancy_decreasing": True}
    constants = [row.C2 for row in table.rows]
    assert max(constants) / min(constants) < 2
