"""Radial sub/supersolution barriers and the comparison checks built on them.

A SUB barrier centred at y inside O+ is tanh(r(x)/eps) with the quadratic
r(x) = (R0^2 - |x - y|^2) / (2 R0); a SUPER barrier inside O- is its
negation. Under the forced equation phi stays above every SUB barrier and
below every SUPER barrier.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import optimize

from ..types import codes
from ..types.barrier import Barrier, BarrierKind
from ..types.defaults import PreconfiguredDefaults
from ..types.diagnostics import CheckReport, DiagnosticsSink
from ..types.errors import ComparisonViolation, GeometryError, OrderingViolation
from ..types.geometry import ObstacleSet
from ..types.grid import ScalarField, TorusGrid
from ..types.simulation import SimState
from .torus_grid import distance_field, node_index, torus_distance

logger = logging.getLogger(__name__)


def barrier_profile(b: Barrier, grid: TorusGrid) -> ScalarField:
    if not b.R0 + 2.0 * math.sqrt(b.eps) < 0.5:
        raise GeometryError(
            f"barrier at {b.center}: R0 + 2 sqrt(eps) = {b.R0 + 2 * math.sqrt(b.eps):.6g} does not fit in half a period"
        )
    dist = distance_field(grid, b.center)
    r = (b.R0**2 - dist**2) / (2.0 * b.R0)
    return ScalarField(grid, b.sign * np.tanh(r / b.eps))


def _admissibility_gap(eps: float, d: int) -> float:
    # (4 / sqrt(eps)) tanh(1 / sqrt(eps)) - 2d, both sides multiplied by R0
    root = math.sqrt(eps)
    return 4.0 / root * math.tanh(1.0 / root) - 2.0 * d


def admissibility_threshold(d: int, R0: float) -> float:
    """Largest eps in (0, 1) with 2d/R0 <= (4/(sqrt(eps) R0)) tanh(1/sqrt(eps)).

    R0 multiplies both sides, so the threshold depends on d alone.
    """
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if R0 <= 0:
        raise ValueError(f"R0 must be positive, got {R0}")
    if _admissibility_gap(1.0, d) >= 0:
        return 1.0
    return optimize.bisect(_admissibility_gap, 1e-12, 1.0, args=(d,), rtol=1e-6, xtol=1e-15)


def barriers_for(obstacles: ObstacleSet, eps: float) -> List[Barrier]:
    """One SUB barrier per O+ ball and one SUPER barrier per O- ball, radius R0."""
    barriers = [Barrier(tuple(b.center), obstacles.R0, eps, BarrierKind.SUB) for b in obstacles.plus]
    barriers += [Barrier(tuple(b.center), obstacles.R0, eps, BarrierKind.SUPER) for b in obstacles.minus]
    return barriers


def barrier_violations(b: Barrier, obstacles: ObstacleSet) -> List[str]:
    """Fit in half a period, containment in an obstacle ball of its family, eps below the threshold."""
    problems = []
    if not b.R0 + 2.0 * math.sqrt(b.eps) < 0.5:
        problems.append(f"R0 + 2 sqrt(eps) = {b.R0 + 2 * math.sqrt(b.eps):.6g} must be < 1/2 for barriers")
    balls = obstacles.plus if b.kind is BarrierKind.SUB else obstacles.minus
    if not any(torus_distance(b.center, ball.center) + b.R0 <= ball.radius + 1e-12 for ball in balls):
        problems.append(f"{b.kind.value} barrier ball B({b.center}, {b.R0}) is not inside its obstacle")
    eps1 = admissibility_threshold(len(b.center), b.R0)
    if not b.eps < eps1:
        problems.append(f"barrier eps = {b.eps} is not below the admissibility threshold {eps1:.6g}")
    return problems


def _margin_values(phi: np.ndarray, b: Barrier, profile: np.ndarray) -> np.ndarray:
    # nonnegative where the ordering holds
    return phi - profile if b.kind is BarrierKind.SUB else profile - phi


def initial_ordering_check(
    phi0: ScalarField, b: Barrier, tol: float = PreconfiguredDefaults.tol_ordering
) -> CheckReport:
    profile = barrier_profile(b, phi0.grid).values
    margins = _margin_values(phi0.values, b, profile)
    flat = int(margins.argmin())
    worst = float(margins.flat[flat])
    passed = worst >= -tol
    if not passed:
        logger.warning("initial ordering fails for %s barrier at %s: margin %.3g", b.kind.value, b.center, worst)
    return CheckReport(
        name=f"initial_ordering_{b.kind.value}",
        passed=passed,
        code=None if passed else codes.OrderingViolation,
        value=worst,
        bound=-tol,
        witness=node_index(phi0.grid, flat),
        detail=f"barrier centre {tuple(b.center)}",
    )


def default_tolerance(grid: TorusGrid, h2: float = PreconfiguredDefaults.comparison_h2) -> float:
    return h2 * grid.h**2


# ComparisonMonitor checks the two-sided barrier ordering on every record.
#
# Profiles are evaluated once; margins[i] is the running minimum of barrier i
# and latest the most recent margins. A margin below -tol aborts the run.
# on_start checks phi_0 against every barrier and keeps the reports in
# ordering; a crossing beyond ordering_tol aborts before the first step.
class ComparisonMonitor(DiagnosticsSink):
    def __init__(
        self,
        barriers: Sequence[Barrier],
        grid: TorusGrid,
        tol: Optional[float] = None,
        ordering_tol: float = PreconfiguredDefaults.tol_ordering,
    ):
        self.barriers = list(barriers)
        self.grid = grid
        self.tol = default_tolerance(grid) if tol is None else tol
        self.ordering_tol = ordering_tol
        self.ordering: List[CheckReport] = []
        self.profiles = [barrier_profile(b, grid).values for b in self.barriers]
        self.margins = [math.inf] * len(self.barriers)
        self.latest: List[float] = []
        # state that tripped the check, kept for the failure dump
        self.violating_state: Optional[SimState] = None

    def check(self, state: SimState) -> CheckReport:
        latest = []
        for i, (b, profile) in enumerate(zip(self.barriers, self.profiles)):
            margins = _margin_values(state.phi.values, b, profile)
            flat = int(margins.argmin())
            worst = float(margins.flat[flat])
            latest.append(worst)
            self.margins[i] = min(self.margins[i], worst)
            if worst < -self.tol:
                node = node_index(self.grid, flat)
                self.violating_state = state
                logger.error("comparison violated by barrier %d at node %s, t=%.6g", i, node, state.t)
                raise ComparisonViolation(
                    f"{b.kind.value} barrier {i} at {tuple(b.center)}: margin {worst:.6g} < -tol = {-self.tol:.3g} "
                    f"at node {node}, t = {state.t:.6g}",
                    barrier_index=i,
                    margin=worst,
                    node=node,
                    t=state.t,
                )
        self.latest = latest
        return self.report()

    def report(self) -> CheckReport:
        values: Dict[str, float] = {f"barrier_{i}": m for i, m in enumerate(self.margins)}
        worst = min(self.margins) if self.margins else None
        return CheckReport(
            name="comparison",
            passed=True,
            value=None if worst is None or math.isinf(worst) else worst,
            bound=-self.tol,
            values=values,
            detail="running minimum margin per barrier",
        )

    def on_start(self, state: SimState, g: ScalarField) -> None:
        self.ordering = [initial_ordering_check(state.phi, b, self.ordering_tol) for b in self.barriers]
        for b, report in zip(self.barriers, self.ordering):
            if not report.passed:
                raise OrderingViolation(
                    f"initial data is not ordered against the {b.kind.value} barrier at "
                    f"{tuple(b.center)}: margin {report.value:.3g} at node {report.witness}"
                )

    def on_record(self, state: SimState) -> None:
        self.check(state)


def comparison_monitor(state: SimState, barriers: Sequence[Barrier], tol: Optional[float] = None) -> CheckReport:
    """One-shot two-sided comparison check; raises ComparisonViolation below -tol."""
    return ComparisonMonitor(barriers, state.grid, tol).check(state)
