"""Batch scenario runs: geometry, solver and diagnostics wired together.

A run writes into its output directory

    energy.csv       one DiagnosticsRecord per record
    snapshots/       raw phi snapshots at the record cadence
    meshes/          legacy VTK interface meshes at the record cadence
    summary.json     the ScenarioReport
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..flow import ac_solver, barriers, geometry, measures
from ..flow.torus_grid import integrate_values
from ..types import codes
from ..types.config import ScenarioConfig
from ..types.diagnostics import CheckReport, DiagnosticsRecord, DiagnosticsSink, SinkChain
from ..types.errors import AcmfError, ComparisonViolation, EmptyInterface, GeometryError
from ..types.geometry import Ball, InitialSurface, ObstacleSet
from ..types.grid import ScalarField, TorusGrid
from ..types.report import ScenarioReport
from ..types.simulation import SimParams, SimState, Trajectory
from . import config as configuration
from .interface import extract_interface, measure_radius, write_vtk
from .snapshot import write_snapshot

logger = logging.getLogger(__name__)


class RecordingSink(DiagnosticsSink):
    """Turns every record into a DiagnosticsRecord and writes the per-record files."""

    def __init__(
        self,
        config: ScenarioConfig,
        params: SimParams,
        obstacles: ObstacleSet,
        directory: Path,
        monitor: Optional[barriers.ComparisonMonitor] = None,
    ):
        self.config = config
        self.params = params
        self.obstacles = obstacles
        self.directory = directory
        self.monitor = monitor
        self.records: List[DiagnosticsRecord] = []
        self.dissipation: List[CheckReport] = []
        self.g: Optional[ScalarField] = None
        self.avoidance_failure_t: Optional[float] = None
        self._previous_w: Optional[np.ndarray] = None
        self._previous_state: Optional[SimState] = None
        self.stop_requested = False

        output = config.output
        self.snapshot_dir = directory / "snapshots" if output.snapshots else None
        self.mesh_dir = directory / "meshes" if output.meshes else None
        for folder in (self.snapshot_dir, self.mesh_dir):
            if folder is not None:
                folder.mkdir(parents=True, exist_ok=True)

    def on_start(self, state: SimState, g: ScalarField) -> None:
        self.g = g

    def on_record(self, state: SimState) -> None:
        diagnostics = self.config.diagnostics
        record = measures.diagnostics_record(state, self.params)
        if self.monitor is not None:
            record.barrier_margins = list(self.monitor.latest)
        w = measures.phase_indicator(state).values
        if self.records:
            report = measures.dissipation_check(
                self.records[-1],
                record,
                state,
                self.params,
                g=self.g,
                initial=self.records[0],
                tol=diagnostics.tol_dissip,
                prev_state=self._previous_state,
            )
            record.dissipation = report.values["dissipation"]
            record.w_mass_change = integrate_values(np.abs(w - self._previous_w), state.grid)
            self.dissipation.append(report)
            steady = self.config.physics.steady_tol
            if steady is not None and abs(report.values["energy_rate"]) < steady:
                self.stop_requested = True
        self._previous_w = w
        self._previous_state = state

        if diagnostics.avoidance and not self.obstacles.empty and self.avoidance_failure_t is None:
            avoidance = measures.obstacle_avoidance_check(
                state, self.obstacles, self.params, diagnostics.tol_avoid, diagnostics.avoid_phase_tol
            )
            if not avoidance.passed:
                self.avoidance_failure_t = state.t

        self.records.append(record)
        self._write_files(state)
        logger.info(
            "t=%.5g step=%d energy=%.6g mu=%.6g discrepancy=%.3g",
            state.t,
            state.step,
            record.energy,
            record.mu_mass,
            record.discrepancy_l1,
        )

    def _write_files(self, state: SimState) -> None:
        stem = f"step_{state.step:08d}"
        if self.snapshot_dir is not None:
            write_snapshot(self.snapshot_dir / f"{stem}.acmf", state, self.params.eps)
        if self.mesh_dir is not None:
            try:
                write_vtk(extract_interface(state), self.mesh_dir / f"{stem}.vtk")
            except EmptyInterface:
                logger.info("no interface at t=%.6g, mesh skipped", state.t)

    def write_csv(self, path: Path) -> None:
        if not self.records:
            return
        rows = [r.to_row() for r in self.records]
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)


def _first_ball(surface: InitialSurface) -> Ball:
    return surface.primitives()[0]


class ScenarioRunner:
    """Runs one scenario and assembles its ScenarioReport."""

    def __init__(self, config: ScenarioConfig, directory: Optional[Union[str, Path]] = None):
        self.config = config
        self.directory = Path(directory if directory is not None else config.output.directory)
        self.grid: TorusGrid = configuration.grid_of(config)
        self.params: SimParams = configuration.params_of(config)
        self.obstacles: ObstacleSet = configuration.obstacles_of(config)
        self.surface: InitialSurface = configuration.surface_of(config)
        self.report = ScenarioReport(name=config.name, config=configuration.summary_config(config))
        self.sink: Optional[RecordingSink] = None
        self.monitor: Optional[barriers.ComparisonMonitor] = None

    def run(self) -> ScenarioReport:
        self.directory.mkdir(parents=True, exist_ok=True)
        logger.info("running scenario %s into %s", self.config.name, self.directory)
        try:
            self._execute()
        except AcmfError as exc:
            logger.error("scenario %s failed: %s", self.config.name, exc)
            self.report.exit_code = exc.exit_code
            self.report.code = exc.code
            self.report.message = str(exc)
            if isinstance(exc, ComparisonViolation) and self.monitor is not None:
                dumped = self.monitor.violating_state
                if dumped is not None:
                    write_snapshot(self.directory / "violation.acmf", dumped, self.params.eps)
        finally:
            if self.sink is not None:
                self.sink.write_csv(self.directory / "energy.csv")
                self.report.records = len(self.sink.records)
            (self.directory / "summary.json").write_text(self.report.model_dump_json(indent=2))
        return self.report

    def _execute(self) -> None:
        config = self.config
        physics = config.physics
        assumptions = geometry.validate_assumptions(self.surface, self.obstacles, physics.delta1, self.grid)
        self.report.checks.extend(assumptions)
        failed = [r for r in assumptions if not r.passed]
        if failed:
            raise GeometryError(
                "standing assumptions violated: " + ", ".join(r.name for r in failed),
                code=codes.AssumptionViolation,
            )

        diagnostics = config.diagnostics
        use_barriers = diagnostics.barriers and not self.obstacles.empty
        if use_barriers:
            tol = diagnostics.tol_comparison
            if tol is None:
                tol = barriers.default_tolerance(self.grid, diagnostics.comparison_h2)
            self.monitor = barriers.ComparisonMonitor(
                barriers.barriers_for(self.obstacles, physics.eps), self.grid, tol, diagnostics.tol_ordering
            )

        self.sink = RecordingSink(config, self.params, self.obstacles, self.directory, self.monitor)
        hooks = SinkChain(self.monitor, self.sink) if self.monitor is not None else self.sink
        try:
            trajectory = ac_solver.run(
                self.surface,
                self.obstacles,
                self.params,
                self.grid,
                hooks,
                physics.record_every,
                saturation=geometry.barrier_saturation(physics.eps, physics.R0) if use_barriers else None,
                perturbation=config.initial.perturbation,
                seed=config.seed,
                forcing=physics.forcing,
            )
        finally:
            if self.monitor is not None:
                self.report.checks.extend(self.monitor.ordering)
        g = self.sink.g
        final = trajectory.final
        self.report.final_t = final.t
        self.report.stopped_early = final.step < self.params.n_steps

        self._post_run(trajectory, g)
        if self.monitor is not None:
            self.report.checks.append(self.monitor.report())
            self.report.constants["min_barrier_margin"] = min(self.monitor.margins)

        failed = self.report.failed_checks()
        if failed and config.diagnostics.strict:
            self.report.exit_code = codes.ExitDiagnostics
            self.report.code = failed[0].code
            self.report.message = "failed checks: " + ", ".join(c.name for c in failed)
            logger.error("scenario %s: %s", config.name, self.report.message)

    def _post_run(self, trajectory: Trajectory, g: ScalarField) -> None:
        config = self.config
        diagnostics = config.diagnostics
        params = self.params
        sink = self.sink
        states = trajectory.states
        final = trajectory.final
        constants = self.report.constants
        checks = self.report.checks
        forced = bool(np.any(g.values != 0))

        final_record = measures.diagnostics_record(final, params)
        constants["final_energy"] = final_record.energy
        constants["final_discrepancy"] = final_record.discrepancy_l1
        constants["final_mu_mass"] = final_record.mu_mass

        if diagnostics.energy:
            checks.append(self._dissipation_summary())
            if not forced:
                checks.append(self._energy_monotone())
            else:
                checks.append(measures.forcing_budget(states + [final], g, params, diagnostics.tol_dissip))

        anchor = _first_ball(self.surface).center
        if diagnostics.monotonicity:
            s = configuration.monotonicity_time(config, params)
            points = [tuple(p) for p in diagnostics.monotonicity_points] or [anchor]
            window = [st for st in states if st.t < s and s - st.t <= measures.KERNEL_HORIZON]
            for i, point in enumerate(points):
                if len(window) < 2:
                    checks.append(
                        CheckReport(name="monotonicity", passed=True, detail="fewer than two records within the kernel horizon")
                    )
                    break
                report = measures.monotonicity_check(window, point, s, params, g, diagnostics.tol_mono)
                checks.append(report)
                if i == 0:
                    series = measures.monotonicity_series(window, point, s, params, g)
                    offset = len(states) - len(window)
                    for k, value in enumerate(series):
                        sink.records[offset + k].monotonicity_ratio = value / series[0] if series[0] else 1.0
            s0 = min(s, measures.KERNEL_HORIZON)
            constants["initial_gaussian_density"] = measures.gaussian_density(states[0], points[0], s0, params)

        if diagnostics.holder:
            holder = measures.holder_check(states + ([final] if final.step != states[-1].step else []))
            checks.append(holder)
            constants["C2"] = holder.value or 0.0

        if diagnostics.brakke:
            center = tuple(diagnostics.brakke_center) if diagnostics.brakke_center else anchor
            radius = diagnostics.brakke_radius or min(0.45, 1.5 * _first_ball(self.surface).radius)
            bump = measures.bump_function(self.grid, center, radius)
            residuals = measures.brakke_series(states, bump, params, g)
            for record, residual in zip(sink.records, residuals):
                record.brakke_residual = residual
            constants["brakke_residual"] = residuals[-1]
            checks.append(CheckReport(name="brakke", passed=True, value=residuals[-1], detail="reported, not bounded"))

        if diagnostics.gradient_bound:
            gradient = ac_solver.gradient_bound_check(final, params, diagnostics.gradient_limit)
            checks.append(gradient)
            constants["max_eps_grad"] = gradient.values["eps_grad"]

        if diagnostics.avoidance and not self.obstacles.empty:
            checks.append(
                measures.obstacle_avoidance_check(
                    final, self.obstacles, params, diagnostics.tol_avoid, diagnostics.avoid_phase_tol
                )
            )
            if sink.avoidance_failure_t is not None:
                constants["avoidance_failure_time"] = sink.avoidance_failure_t

        checks.append(measures.bv_bound_check(final, params, diagnostics.tol_bv))

        if diagnostics.density_point is not None and diagnostics.density_radii:
            ratios = measures.density_ratio(final, diagnostics.density_point, diagnostics.density_radii, params)
            for r, ratio in zip(diagnostics.density_radii, ratios):
                constants[f"density_ratio_{r:g}"] = ratio

        if isinstance(self.surface.shape, Ball):
            try:
                radius = measure_radius(extract_interface(final), self.surface.shape.center)
                constants["final_radius"] = radius.mean
                constants["final_radius_std"] = radius.std
            except EmptyInterface:
                constants["final_radius"] = 0.0

    def _dissipation_summary(self) -> CheckReport:
        reports = self.sink.dissipation
        if not reports:
            return CheckReport(name="dissipation", passed=True, detail="fewer than two records")
        worst = max(reports, key=lambda r: r.value)
        failed = [r for r in reports if not r.passed]
        decisive = failed[0] if failed else worst
        return CheckReport(
            name="dissipation",
            passed=not failed,
            code=decisive.code,
            value=worst.value,
            bound=decisive.bound,
            witness=decisive.witness,
            values={"failed_intervals": float(len(failed)), "intervals": float(len(reports))},
        )

    def _energy_monotone(self) -> CheckReport:
        energies = [r.energy for r in self.sink.records]
        increases = [b - a for a, b in zip(energies, energies[1:])]
        worst = max(increases, default=0.0)
        bound = self.config.diagnostics.energy_slack * energies[0]
        passed = worst <= bound
        return CheckReport(
            name="energy_nonincreasing",
            passed=passed,
            code=None if passed else codes.DissipationViolation,
            value=worst,
            bound=bound,
        )


def run_scenario(config: ScenarioConfig, directory: Optional[Union[str, Path]] = None) -> ScenarioReport:
    return ScenarioRunner(config, directory).run()

