"""Energy and measure diagnostics of the phase field.

Every quantity is a reduction over one snapshot (or a sequence of them)
using the periodic stencils and rectangle-rule quadrature of torus_grid.
Checks that must not stop a run return a CheckReport; only misuse of the
Brakke test function raises.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as quadrature

from ..types import codes
from ..types.defaults import PreconfiguredDefaults
from ..types.diagnostics import CheckReport, DiagnosticsRecord, SurfaceMeasures
from ..types.errors import GeometryError, SupportViolation
from ..types.geometry import Ball, ObstacleSet
from ..types.grid import ScalarField, TorusGrid
from ..types.simulation import SimParams, SimState
from .ac_solver import double_well, rhs
from .torus_grid import (
    dirichlet_density_values,
    displacement,
    distance_field,
    gradient_values,
    integrate_values,
    laplacian_values,
)

logger = logging.getLogger(__name__)

SIGMA = 4.0 / 3.0
# measure of the unit ball in dimension d - 1
UNIT_BALL = {2: 2.0, 3: math.pi}
# backward heat kernel is only evaluated for s - t up to this horizon
KERNEL_HORIZON = 1.0 / 16.0
# beyond this s - t the 3^d image sum is widened to 5^d
WIDE_KERNEL_FROM = 1.0 / 36.0


def sigma_quadrature() -> float:
    value, _ = quadrature.quad(lambda s: math.sqrt(2.0 * double_well(s)[0]), -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return value


if abs(sigma_quadrature() - SIGMA) > 1e-10:
    raise RuntimeError("double well normalization does not give sigma = 4/3")


def sigma_constant() -> float:
    return SIGMA


def _energy_parts(phi: np.ndarray, eps: float, h: float) -> Tuple[np.ndarray, np.ndarray]:
    kinetic = 0.5 * eps * dirichlet_density_values(phi, h)
    W = 0.5 * (1.0 - phi**2) ** 2
    return kinetic, W / eps


def surface_measures(state: SimState, params: SimParams) -> SurfaceMeasures:
    grid = state.grid
    kinetic, potential = _energy_parts(state.phi.values, params.eps, grid.h)
    density = (kinetic + potential) / SIGMA
    return SurfaceMeasures(
        mu_mass=integrate_values(density, grid),
        mu_tilde_mass=integrate_values(2.0 * kinetic, grid) / SIGMA,
        mu_hat_mass=integrate_values(2.0 * potential, grid) / SIGMA,
        mu_density=ScalarField(grid, density),
    )


def energy(state: SimState, params: SimParams) -> float:
    kinetic, potential = _energy_parts(state.phi.values, params.eps, state.grid.h)
    return integrate_values(kinetic + potential, state.grid)


def discrepancy(state: SimState, params: SimParams) -> Tuple[ScalarField, float]:
    kinetic, potential = _energy_parts(state.phi.values, params.eps, state.grid.h)
    xi = kinetic - potential
    return ScalarField(state.grid, xi), integrate_values(np.abs(xi), state.grid)


def diagnostics_record(state: SimState, params: SimParams) -> DiagnosticsRecord:
    """Energy, discrepancy and mass columns for one snapshot; the harness fills the rest."""
    measures = surface_measures(state, params)
    _, l1 = discrepancy(state, params)
    return DiagnosticsRecord(
        t=state.t,
        step=state.step,
        energy=SIGMA * measures.mu_mass,
        discrepancy_l1=l1,
        mu_mass=measures.mu_mass,
        mu_tilde_mass=measures.mu_tilde_mass,
        mu_hat_mass=measures.mu_hat_mass,
        min_phi=float(state.phi.values.min()),
        max_phi=float(state.phi.values.max()),
    )


def _forcing_source(state: SimState, params: SimParams, g: Optional[ScalarField]) -> float:
    # right side of the energy inequality: int g^2 W / eps, or (d/R0)^2 int W / eps without g
    W = 0.5 * (1.0 - state.phi.values**2) ** 2
    if g is None:
        weight = (params.d / params.R0) ** 2
        return weight * integrate_values(W / params.eps, state.grid)
    return integrate_values(g.values**2 * W / params.eps, state.grid)


def _dissipation_terms(state: SimState, params: SimParams, g: Optional[ScalarField]) -> Tuple[float, float, float]:
    grid = state.grid
    eps = params.eps
    phi = state.phi.values
    _, Wp, _ = double_well(phi)
    mean_curvature = -laplacian_values(phi, grid.h) + Wp / eps**2
    forcing = grid.zeros() if g is None else g
    phi_t = rhs(state, forcing, params).values
    return (
        0.5 * integrate_values(eps * mean_curvature**2, grid),
        0.5 * integrate_values(eps * phi_t**2, grid),
        _forcing_source(state, params, g),
    )


def dissipation_check(
    prev: DiagnosticsRecord,
    cur: DiagnosticsRecord,
    state: SimState,
    params: SimParams,
    g: Optional[ScalarField] = None,
    initial: Optional[DiagnosticsRecord] = None,
    tol: float = PreconfiguredDefaults.tol_dissip,
    prev_state: Optional[SimState] = None,
) -> CheckReport:
    """Energy inequality between two records, in the mean curvature and phi_t forms.

    The time derivative is the record difference. The dissipation and source
    terms are taken at ``state`` (the snapshot of ``cur``), or averaged with
    ``prev_state`` when it is given. When ``initial`` is given the Gronwall
    bound E(t) <= E(0) exp(d^2 t / R0^2) is checked as well.
    """
    dissipation, dissipation_t, source = _dissipation_terms(state, params, g)
    if prev_state is not None:
        before = _dissipation_terms(prev_state, params, g)
        dissipation = 0.5 * (dissipation + before[0])
        dissipation_t = 0.5 * (dissipation_t + before[1])
        source = 0.5 * (source + before[2])

    dt = cur.t - prev.t
    rate = (cur.energy - prev.energy) / dt if dt > 0 else 0.0
    scale = max(abs(rate), dissipation, dissipation_t, source, 1e-300)
    excess = rate + dissipation - source
    excess_t = rate + dissipation_t - source
    passed = max(excess, excess_t) <= tol * scale
    values: Dict[str, float] = {
        "energy_rate": rate,
        "dissipation": dissipation,
        "dissipation_phi_t": dissipation_t,
        "source": source,
    }
    if initial is not None:
        growth = math.exp((params.d / params.R0) ** 2 * (cur.t - initial.t))
        gronwall_bound = initial.energy * growth * (1.0 + tol)
        values["gronwall_bound"] = gronwall_bound
        passed = passed and cur.energy <= gronwall_bound
    if not passed:
        logger.warning("dissipation inequality fails on [%.6g, %.6g]: excess %.3g", prev.t, cur.t, excess)
    return CheckReport(
        name="dissipation",
        passed=passed,
        code=None if passed else codes.DissipationViolation,
        value=max(excess, excess_t),
        bound=tol * scale,
        witness=(prev.t, cur.t),
        values=values,
    )


def heat_kernel(grid: TorusGrid, y: Sequence[float], tau: float) -> np.ndarray:
    """Backward heat kernel (4 pi tau)^{-(d-1)/2} exp(-|x - y|^2 / (4 tau)) summed over periodic images."""
    if not 0 < tau <= KERNEL_HORIZON * (1 + 1e-12):
        raise ValueError(f"kernel time s - t = {tau} must lie in (0, {KERNEL_HORIZON}]")
    reach = 2 if tau > WIDE_KERNEL_FROM else 1
    base = displacement(grid, y)
    total = np.zeros(grid.shape)
    for shift in itertools.product(range(-reach, reach + 1), repeat=grid.d):
        sq = sum((base[axis] + shift[axis]) ** 2 for axis in range(grid.d))
        total += np.exp(-sq / (4.0 * tau))
    return total / (4.0 * math.pi * tau) ** ((grid.d - 1) / 2.0)


def gaussian_density(state: SimState, y: Sequence[float], s: float, params: SimParams) -> float:
    """Integral of the backward heat kernel rho_{y,s}(., t) against mu_t."""
    density = surface_measures(state, params).mu_density.values
    return integrate_values(heat_kernel(state.grid, y, s - state.t) * density, state.grid)


def _monotonicity_decay(params: SimParams, g: Optional[ScalarField]) -> float:
    if g is None:
        return (params.d / params.R0) ** 2 / 2.0
    return float(np.abs(g.values).max()) ** 2 / 2.0


def monotonicity_series(
    snapshots: Sequence[SimState],
    y: Sequence[float],
    s: float,
    params: SimParams,
    g: Optional[ScalarField] = None,
) -> List[float]:
    """exp(-c t) int rho dmu_t minus the accumulated discrepancy term, per snapshot."""
    c = _monotonicity_decay(params, g)
    series = []
    accumulated = 0.0
    prev_t = prev_term = None
    for state in snapshots:
        if not state.t < s:
            raise ValueError(f"snapshot time {state.t} is not before s = {s}")
        tau = s - state.t
        kernel = heat_kernel(state.grid, y, tau)
        kinetic, potential = _energy_parts(state.phi.values, params.eps, state.grid.h)
        weighted = integrate_values(kernel * (kinetic + potential), state.grid) / SIGMA
        xi_term = integrate_values(kernel * (kinetic - potential), state.grid) / (SIGMA * 2.0 * tau)
        term = math.exp(-c * state.t) * xi_term
        if prev_t is not None:
            accumulated += 0.5 * (term + prev_term) * (state.t - prev_t)
        prev_t, prev_term = state.t, term
        series.append(math.exp(-c * state.t) * weighted - accumulated)
    return series


def monotonicity_check(
    snapshots: Sequence[SimState],
    y: Sequence[float],
    s: float,
    params: SimParams,
    g: Optional[ScalarField] = None,
    tol: float = PreconfiguredDefaults.tol_mono,
) -> CheckReport:
    series = monotonicity_series(snapshots, y, s, params, g)
    reference = max((abs(v) for v in series), default=0.0)
    worst, witness = 0.0, None
    for k in range(1, len(series)):
        increase = series[k] - series[k - 1]
        if increase > worst:
            worst, witness = increase, (snapshots[k - 1].t, snapshots[k].t)
    passed = worst <= tol * max(reference, 1e-300)
    ratio = series[-1] / series[0] if series and series[0] != 0 else 1.0
    if not passed:
        logger.warning("monotonicity fails on %s for y=%s: increase %.3g", witness, tuple(y), worst)
    return CheckReport(
        name="monotonicity",
        passed=passed,
        code=None if passed else codes.MonotonicityViolation,
        value=worst,
        bound=tol * reference,
        witness=witness,
        values={"ratio": ratio, "initial": series[0] if series else 0.0},
        detail=f"y = {tuple(y)}, s = {s}",
    )


def phase_indicator(state: SimState) -> ScalarField:
    phi = state.phi.values
    return ScalarField(state.grid, 0.75 * (phi - phi**3 / 3.0 + 2.0 / 3.0))


def holder_check(states: Sequence[SimState]) -> CheckReport:
    """Largest int |w(t2) - w(t1)| / sqrt(t2 - t1) over all record pairs (empirical C2)."""
    indicators = [phase_indicator(s).values for s in states]
    worst, witness = 0.0, None
    for i, j in itertools.combinations(range(len(states)), 2):
        gap = states[j].t - states[i].t
        if gap <= 0:
            continue
        ratio = integrate_values(np.abs(indicators[j] - indicators[i]), states[i].grid) / math.sqrt(gap)
        if ratio > worst:
            worst, witness = ratio, (states[i].t, states[j].t)
    return CheckReport(name="holder", passed=True, value=worst, witness=witness, detail="empirical C2")


def bump_function(grid: TorusGrid, center: Sequence[float], radius: float) -> ScalarField:
    """C^2 bump (1 - |x - c|^2 / radius^2)^3, zero outside the ball."""
    if radius <= 0 or radius >= 0.5:
        raise GeometryError(f"bump radius must lie in (0, 1/2), got {radius}")
    q = 1.0 - distance_field(grid, center) ** 2 / radius**2
    return ScalarField(grid, np.maximum(q, 0.0) ** 3)


def _brakke_terms(state: SimState, test_fn: np.ndarray, eps: float) -> Tuple[float, float]:
    grid = state.grid
    phi = state.phi.values
    kinetic, potential = _energy_parts(phi, eps, grid.h)
    measure = integrate_values(test_fn * (kinetic + potential), grid) / SIGMA
    _, Wp, _ = double_well(phi)
    w = -eps * laplacian_values(phi, grid.h) + Wp / eps
    cross = np.sum(gradient_values(test_fn, grid.h) * gradient_values(phi, grid.h), axis=0)
    variation = integrate_values(-test_fn * w**2 / eps + cross * w, grid) / SIGMA
    return measure, variation


def check_test_function(test_fn: ScalarField, g: Optional[ScalarField] = None) -> None:
    """Raise SupportViolation unless test_fn >= 0 and vanishes wherever g does not."""
    f = test_fn.values
    if f.min() < -1e-14:
        raise SupportViolation(f"test function takes negative values (min {f.min():.3g})")
    if g is not None:
        overlap = (np.abs(g.values) > 0) & (f > 0)
        if overlap.any():
            node = tuple(int(i) for i in np.argwhere(overlap)[0])
            raise SupportViolation(f"test function support meets the forcing region at node {node}")


def brakke_series(
    snapshots: Sequence[SimState],
    test_fn: ScalarField,
    params: SimParams,
    g: Optional[ScalarField] = None,
) -> List[float]:
    """Residual of the weighted energy identity from the first snapshot to each later one."""
    check_test_function(test_fn, g)
    residuals = []
    integral = 0.0
    first = previous = None
    for state in snapshots:
        measure, variation = _brakke_terms(state, test_fn.values, params.eps)
        if first is None:
            first = measure
        else:
            integral += 0.5 * (variation + previous[1]) * (state.t - previous[0])
        previous = (state.t, variation)
        residuals.append(abs(measure - first - integral))
    return residuals


def brakke_residual(
    snapshots: Sequence[SimState],
    test_fn: ScalarField,
    params: SimParams,
    window: Optional[Tuple[float, float]] = None,
    g: Optional[ScalarField] = None,
) -> float:
    """|mu_t2(f) - mu_t1(f) - int_t1^t2 (1/sigma) int (-f w^2/eps + grad f . grad phi w) dt|.

    ``snapshots`` are the recorded states; the time integral is the trapezoid
    rule over those inside ``window``, with w = -eps laplacian(phi) + W'(phi)/eps.
    The test function must be nonnegative and vanish wherever g does not.
    """
    if window is not None:
        t1, t2 = window
        snapshots = [s for s in snapshots if t1 - 1e-12 <= s.t <= t2 + 1e-12]
    if len(snapshots) < 2:
        check_test_function(test_fn, g)
        return 0.0
    return brakke_series(snapshots, test_fn, params, g)[-1]


def density_ratio(state: SimState, x0: Sequence[float], radii: Sequence[float], params: SimParams) -> List[float]:
    grid = state.grid
    omega = UNIT_BALL[grid.d]
    density = surface_measures(state, params).mu_density.values
    dist = distance_field(grid, x0)
    ratios = []
    for r in radii:
        if r < 3.0 * params.eps:
            raise GeometryError(f"density radius {r} is thinner than the interface layer (3 eps = {3 * params.eps})")
        mass = integrate_values(np.where(dist <= r, density, 0.0), grid)
        ratios.append(mass / (omega * r ** (grid.d - 1)))
    return ratios


def _shrunk_mask(balls: Sequence[Ball], grid: TorusGrid, margin: float) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for ball in balls:
        if ball.radius > margin:
            mask |= distance_field(grid, ball.center) <= ball.radius - margin
    return mask


def obstacle_avoidance_check(
    state: SimState,
    obstacles: ObstacleSet,
    params: SimParams,
    tol_avoid: float = PreconfiguredDefaults.tol_avoid,
    phase_tol: float = PreconfiguredDefaults.avoid_phase_tol,
) -> CheckReport:
    grid = state.grid
    phi = state.phi.values
    density = surface_measures(state, params).mu_density.values
    margin = 3.0 * params.eps
    values: Dict[str, float] = {}
    passed = True
    for family, balls, sign in (("plus", obstacles.plus, 1.0), ("minus", obstacles.minus, -1.0)):
        mask = _shrunk_mask(balls, grid, margin)
        if not mask.any():
            continue
        mass = integrate_values(np.where(mask, density, 0.0), grid)
        # sign * phi should be close to 1 inside its own obstacle
        closest = float((sign * phi)[mask].min())
        values[f"mass_{family}"] = mass
        values[f"phase_{family}"] = sign * closest
        if mass > tol_avoid or closest < 1.0 - phase_tol:
            passed = False
    if not passed:
        logger.warning("obstacle avoidance fails at t=%.6g: %s", state.t, values)
    return CheckReport(
        name="obstacle_avoidance",
        passed=passed,
        code=None if passed else codes.AvoidanceViolation,
        value=max((v for k, v in values.items() if k.startswith("mass_")), default=0.0),
        bound=tol_avoid,
        values=values,
        detail="obstacle balls shrunk by 3 eps",
    )


def forcing_budget(
    snapshots: Sequence[SimState],
    g: ScalarField,
    params: SimParams,
    tol: float = PreconfiguredDefaults.tol_dissip,
) -> CheckReport:
    """Time integral of int (g sqrt(2W))^2 / eps against 2 E(0) (sup g)^2 T exp((sup g)^2 T)."""
    if not snapshots:
        return CheckReport(name="forcing_budget", passed=True, value=0.0, bound=0.0)
    grid = g.grid
    sup_sq = float(np.abs(g.values).max()) ** 2
    rates = [
        integrate_values(g.values**2 * (1.0 - s.phi.values**2) ** 2 / params.eps, grid) for s in snapshots
    ]
    total = sum(0.5 * (rates[k] + rates[k - 1]) * (snapshots[k].t - snapshots[k - 1].t) for k in range(1, len(rates)))
    T = snapshots[-1].t - snapshots[0].t
    bound = 2.0 * energy(snapshots[0], params) * sup_sq * T * math.exp(sup_sq * T)
    passed = total <= bound * (1.0 + tol) + 1e-300
    return CheckReport(
        name="forcing_budget",
        passed=passed,
        code=None if passed else codes.DissipationViolation,
        value=total,
        bound=bound,
    )


def bv_bound_check(state: SimState, params: SimParams, tol: Optional[float] = None) -> CheckReport:
    """Total variation of the phase indicator against the surface measure.

    The discrete inequality holds up to a stencil error, allowed as a
    relative slack of (h/eps)^2 unless ``tol`` is given.
    """
    grid = state.grid
    w = phase_indicator(state).values
    variation = integrate_values(np.sqrt(np.sum(gradient_values(w, grid.h) ** 2, axis=0)), grid)
    mass = surface_measures(state, params).mu_mass
    slack = (grid.h / params.eps) ** 2 if tol is None else tol
    bound = mass * (1.0 + slack) + 1e-12
    passed = variation <= bound
    return CheckReport(
        name="bv_bound",
        passed=passed,
        code=None if passed else codes.BVBoundExceeded,
        value=variation,
        bound=bound,
    )
