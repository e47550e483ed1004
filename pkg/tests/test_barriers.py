import math

import numpy as np
import pytest

from acmf.flow.ac_solver import evolve, step
from acmf.flow.barriers import (
    ComparisonMonitor,
    admissibility_threshold,
    barrier_profile,
    barrier_violations,
    barriers_for,
    comparison_monitor,
    default_tolerance,
    initial_ordering_check,
)
from acmf.flow.geometry import barrier_saturation, build_forcing, signed_distance, smooth_initial_profile
from acmf.types import codes
from acmf.types.barrier import Barrier, BarrierKind
from acmf.types.errors import ComparisonViolation, GeometryError, OrderingViolation
from acmf.types.geometry import Ball, InitialSurface, ObstacleSet
from acmf.types.grid import ScalarField, TorusGrid
from acmf.types.simulation import SimParams, SimState


def _proof_inequality(eps, d):
    # 2d <= (4 / sqrt(eps)) tanh(1 / sqrt(eps)), R0 cancelled
    return 2 * d <= 4 / math.sqrt(eps) * math.tanh(1 / math.sqrt(eps))


def _initial_phi(grid, eps, R0, radius, center=(0.5, 0.5)):
    r0 = signed_distance(InitialSurface(Ball(center, radius)), grid)
    return smooth_initial_profile(r0, eps, R0, saturation=barrier_saturation(eps, R0))


def test_barrier_profile_examples():
    grid = TorusGrid(2, 100)
    sub = Barrier((0.5, 0.5), 0.2, 0.01, BarrierKind.SUB)
    sup = Barrier((0.5, 0.5), 0.2, 0.01, BarrierKind.SUPER)
    lower = barrier_profile(sub, grid).values
    upper = barrier_profile(sup, grid).values
    assert lower[50, 50] == pytest.approx(math.tanh(0.2 / 0.02))
    assert upper[50, 50] == pytest.approx(-math.tanh(0.2 / 0.02))
    assert lower[70, 50] == pytest.approx(0.0, abs=1e-12)
    assert upper[50, 30] == pytest.approx(0.0, abs=1e-12)
    assert np.array_equal(upper, -lower)


def test_barrier_profile_is_radially_decreasing():
    grid = TorusGrid(2, 128)
    lower = barrier_profile(Barrier((0.5, 0.5), 0.12, 0.02), grid).values
    ray = lower[64:, 64]
    assert np.all(np.diff(ray) <= 0)
    assert np.abs(lower).max() <= 1.0
    assert lower.max() < 1.0


def test_barrier_profile_rejects_large_support():
    grid = TorusGrid(2, 64)
    with pytest.raises(GeometryError):
        barrier_profile(Barrier((0.5, 0.5), 0.4, 0.01), grid)


def test_admissibility_threshold():
    eps2 = admissibility_threshold(2, 0.1)
    eps3 = admissibility_threshold(3, 0.1)
    assert eps2 == pytest.approx(0.6948, abs=1e-3)
    assert eps3 < eps2
    assert admissibility_threshold(2, 0.37) == pytest.approx(eps2, rel=1e-9)
    assert _proof_inequality(0.25, 2)
    for d, threshold in ((2, eps2), (3, eps3)):
        assert _proof_inequality(threshold / 1.01, d)
        assert not _proof_inequality(threshold * 1.01, d)
        assert _proof_inequality(1e-6, d)


def test_admissibility_threshold_rejects_bad_input():
    with pytest.raises(ValueError):
        admissibility_threshold(4, 0.1)
    with pytest.raises(ValueError):
        admissibility_threshold(2, 0.0)


def test_barriers_for_obstacles():
    obstacles = ObstacleSet(
        plus=[Ball((0.25, 0.25), 0.05)],
        minus=[Ball((0.75, 0.75), 0.05), Ball((0.75, 0.25), 0.06)],
        R0=0.05,
        R1=0.2,
    )
    barriers = barriers_for(obstacles, 0.01)
    assert [b.kind for b in barriers] == [BarrierKind.SUB, BarrierKind.SUPER, BarrierKind.SUPER]
    assert barriers[2].center == (0.75, 0.25)
    assert all(b.R0 == 0.05 for b in barriers)
    assert barrier_violations(barriers[0], obstacles) == []


def test_barrier_violations():
    obstacles = ObstacleSet(plus=[Ball((0.25, 0.25), 0.05)], R0=0.05, R1=0.2)
    outside = Barrier((0.6, 0.6), 0.05, 0.01)
    assert any("not inside" in p for p in barrier_violations(outside, obstacles))
    coarse = Barrier((0.25, 0.25), 0.05, 0.9)
    assert any("admissibility" in p for p in barrier_violations(coarse, obstacles))


def test_initial_ordering_with_clearance():
    grid = TorusGrid(2, 128)
    phi0 = _initial_phi(grid, 0.02, 0.12, 0.3)
    report = initial_ordering_check(phi0, Barrier((0.5, 0.5), 0.12, 0.02))
    assert report.passed
    assert report.name == "initial_ordering_sub"
    assert report.value > 0


def test_initial_ordering_without_clearance():
    grid = TorusGrid(2, 128)
    phi0 = _initial_phi(grid, 0.02, 0.12, 0.12)
    report = initial_ordering_check(phi0, Barrier((0.5, 0.5), 0.12, 0.02))
    assert report.passed
    assert -1e-12 <= report.value <= 1e-3


def test_initial_ordering_fails_for_minus_inside():
    grid = TorusGrid(2, 128)
    phi0 = _initial_phi(grid, 0.02, 0.12, 0.3)
    report = initial_ordering_check(phi0, Barrier((0.5, 0.5), 0.12, 0.02, BarrierKind.SUPER))
    assert not report.passed
    assert report.code == codes.OrderingViolation
    assert report.witness is not None


def test_comparison_monitor_at_initial_time_matches_ordering():
    grid = TorusGrid(2, 128)
    phi0 = _initial_phi(grid, 0.02, 0.12, 0.3)
    barrier = Barrier((0.5, 0.5), 0.12, 0.02)
    report = comparison_monitor(SimState(phi0), [barrier])
    assert report.passed
    assert report.value == pytest.approx(initial_ordering_check(phi0, barrier).value)


def test_comparison_monitor_raises_below_tolerance():
    grid = TorusGrid(2, 128)
    barrier = Barrier((0.5, 0.5), 0.12, 0.02)
    state = SimState(grid.constant(-0.99), t=0.3)
    with pytest.raises(ComparisonViolation) as info:
        comparison_monitor(state, [barrier])
    error = info.value
    assert error.barrier_index == 0
    assert error.exit_code == codes.ExitBarrier
    assert error.code == codes.ComparisonViolation
    assert error.margin == pytest.approx(-0.99 - math.tanh(0.12 / 0.04))
    assert error.node == (64, 64)
    assert error.t == 0.3


def test_monitor_keeps_running_minimum():
    grid = TorusGrid(2, 128)
    barrier = Barrier((0.5, 0.5), 0.12, 0.02)
    monitor = ComparisonMonitor([barrier], grid)
    assert monitor.tol == default_tolerance(grid) == pytest.approx(10 / 128**2)
    monitor.on_record(SimState(grid.constant(0.999)))
    first = monitor.margins[0]
    monitor.on_record(SimState(grid.constant(0.9999)))
    assert monitor.margins[0] == first
    assert monitor.latest[0] > first
    assert monitor.report().values == {"barrier_0": first}


def test_sign_involution_preserves_margins():
    grid = TorusGrid(2, 128)
    phi0 = _initial_phi(grid, 0.02, 0.12, 0.3)
    sub = Barrier((0.5, 0.5), 0.12, 0.02, BarrierKind.SUB)
    sup = Barrier((0.5, 0.5), 0.12, 0.02, BarrierKind.SUPER)
    direct = ComparisonMonitor([sub], grid).check(SimState(phi0))
    mirrored = ComparisonMonitor([sup], grid).check(SimState(-phi0))
    assert mirrored.value == direct.value


def test_wide_barrier_keeps_phi0_inside_the_wells():
    # R0 / (2 eps) + 2 > 19, where an unclamped tanh rounds to exactly 1
    grid = TorusGrid(2, 512)
    eps, R0 = 0.008, 0.3
    assert barrier_saturation(eps, R0) == pytest.approx(16 * eps)
    phi0 = _initial_phi(grid, eps, R0, 0.45)
    assert phi0.max_abs() < 1.0

    ordering = initial_ordering_check(phi0, Barrier((0.5, 0.5), R0, eps))
    assert ordering.passed, ordering.value

    obstacles = ObstacleSet(plus=[Ball((0.5, 0.5), R0)], R0=R0, R1=0.6)
    g = build_forcing(obstacles, eps, grid)
    params = SimParams.for_grid(grid, eps=eps, R0=R0, R1=0.6, t_end=0.0)
    state = SimState(phi0)
    for _ in range(20):
        state = step(state, g, params)
    assert state.step == 20
    assert state.phi.max_abs() < 1.0


def _worst_crossing_from_barrier(n):
    # phi_0 is the SUB barrier itself: the ordering is tight on the barrier interface
    grid = TorusGrid(2, n)
    eps, R0 = 1 / 32, 0.13
    barrier = Barrier((0.5, 0.5), R0, eps)
    profile = barrier_profile(barrier, grid).values
    phi0 = ScalarField(grid, np.maximum(profile, np.nextafter(-1.0, 0.0)))
    obstacles = ObstacleSet(plus=[Ball((0.5, 0.5), R0)], R0=R0, R1=1.2)
    g = build_forcing(obstacles, eps, grid)
    params = SimParams.for_grid(grid, eps=eps, R0=R0, R1=1.2, t_end=0.005)
    monitor = ComparisonMonitor([barrier], grid, tol=1.0)
    evolve(SimState(phi0), g, params, monitor, record_every=1)
    return max(0.0, -min(monitor.margins))


@pytest.mark.slow
def test_barrier_crossing_is_second_order():
    coarse = _worst_crossing_from_barrier(128)
    fine = _worst_crossing_from_barrier(256)
    assert coarse <= 10 / 128**2
    assert fine <= max(coarse / 3, 1e-12)


def test_monitor_rejects_crossing_initial_data():
    grid = TorusGrid(2, 64)
    barrier = Barrier((0.5, 0.5), 0.2, 0.02)
    state = SimState(ScalarField(grid, np.full(grid.shape, -0.5)))
    with pytest.raises(OrderingViolation):
        ComparisonMonitor([barrier], grid).on_start(state, grid.zeros())
    lenient = ComparisonMonitor([barrier], grid, ordering_tol=2.0)
    lenient.on_start(state, grid.zeros())
    assert [r.passed for r in lenient.ordering] == [True]
    assert lenient.ordering[0].bound == -2.0


def test_default_tolerance_scales_with_h2():
    grid = TorusGrid(2, 64)
    assert default_tolerance(grid, 2.0) == pytest.approx(2.0 / 64**2)
