"""Obstacles, signed distances, the forcing field and the initial profile."""

import logging
import math
from typing import List, Optional

import numpy as np

from ..types import codes
from ..types.diagnostics import CheckReport
from ..types.errors import GeometryError
from ..types.geometry import (
    Ball,
    ComplementShape,
    InitialSurface,
    IntersectionShape,
    ObstacleSet,
    Shape,
    UnionShape,
)
from ..types.grid import ScalarField, TorusGrid
from .torus_grid import distance_field, node_index, torus_distance

logger = logging.getLogger(__name__)

# profile saturation in units of eps
PROFILE_WIDTH = 5.0
# largest saturation in units of eps; tanh(16) sits about 2.5e-14 below 1 in float64
SATURATION_LIMIT = 16.0
# max |S'| of the quintic smoothstep, reached at t = 1/2
SMOOTHSTEP_SLOPE = 1.875


def _ball_sdf(ball: Ball, grid: TorusGrid) -> np.ndarray:
    return ball.radius - distance_field(grid, ball.center)


def _shape_sdf(shape: Shape, grid: TorusGrid) -> np.ndarray:
    if isinstance(shape, Ball):
        return _ball_sdf(shape, grid)
    if isinstance(shape, ComplementShape):
        return -_shape_sdf(shape.child, grid)
    parts = [_shape_sdf(child, grid) for child in shape.children]
    if isinstance(shape, UnionShape):
        return np.maximum.reduce(parts)
    if isinstance(shape, IntersectionShape):
        return np.minimum.reduce(parts)
    raise GeometryError(f"unknown shape node {shape!r}")


def signed_distance(surface: InitialSurface, grid: TorusGrid) -> ScalarField:
    """Signed distance to the boundary of U0, positive inside.

    Single balls are exact; unions take the max and intersections the min of
    the children, complements negate.
    """
    for ball in surface.primitives():
        if len(ball.center) != grid.d:
            raise GeometryError(f"ball centre {ball.center} is not {grid.d}-dimensional")
        if not ball.radius < 0.5:
            raise GeometryError(f"ball radius {ball.radius} must be < 1/2 to fit in one periodic cell")
        if ball.radius * grid.n < 8:
            raise GeometryError(
                f"ball radius {ball.radius} is resolved by only {ball.radius * grid.n:.2f} cells (need >= 8)"
            )
    return ScalarField(grid, _shape_sdf(surface.shape, grid))


def _clamp(r0: np.ndarray, eps: float, saturation: float) -> np.ndarray:
    # identity on |r| <= saturation - 2 eps, then a C^2 tanh shoulder up to the saturation level
    inner = saturation - 2.0 * eps
    magnitude = np.abs(r0)
    shoulder = inner + 2.0 * eps * np.tanh((magnitude - inner) / (2.0 * eps))
    return np.sign(r0) * np.where(magnitude <= inner, magnitude, shoulder)


def smooth_initial_profile(
    r0: ScalarField,
    eps: float,
    R0: float,
    saturation: Optional[float] = None,
) -> ScalarField:
    """phi_0 = tanh(r~0 / eps) with r~0 the smoothly clamped signed distance.

    The clamp saturates at ``saturation`` (default 5 eps). Callers that check
    barrier ordering raise it to R0/2 + 2 eps so that the identity zone covers
    every level the barriers reach. Saturations beyond 16 eps are lowered to
    16 eps so that phi_0 stays strictly inside (-1, 1).
    """
    if eps <= 0:
        raise GeometryError(f"eps must be positive, got {eps}")
    if eps >= R0 / 4:
        raise GeometryError(f"eps = {eps} must be < R0/4 = {R0 / 4} to resolve the obstacle geometry")
    if saturation is None:
        saturation = PROFILE_WIDTH * eps
    if saturation < 3.0 * eps:
        raise GeometryError(f"profile saturation {saturation} must be >= 3 eps")
    if saturation > SATURATION_LIMIT * eps:
        logger.debug("profile saturation %.4g lowered to %g eps", saturation, SATURATION_LIMIT)
        saturation = SATURATION_LIMIT * eps
    r_tilde = _clamp(r0.values, eps, saturation)
    return ScalarField(r0.grid, np.tanh(r_tilde / eps))


def barrier_saturation(eps: float, R0: float) -> float:
    return min(max(PROFILE_WIDTH * eps, R0 / 2.0 + 2.0 * eps), SATURATION_LIMIT * eps)


def smoothstep_down(t: np.ndarray) -> np.ndarray:
    # S(t) = 1 - (6t^5 - 15t^4 + 10t^3), clamped to 1 for t <= 0 and 0 for t >= 1
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def obstacle_distance(balls: List[Ball], grid: TorusGrid) -> np.ndarray:
    """Distance from each node to a union of balls (0 inside)."""
    if not balls:
        return np.full(grid.shape, np.inf)
    gaps = [distance_field(grid, b.center) - b.radius for b in balls]
    return np.maximum(np.minimum.reduce(gaps), 0.0)


def build_forcing(obstacles: ObstacleSet, eps: float, grid: TorusGrid, d: Optional[int] = None) -> ScalarField:
    """The obstacle forcing g: +d/R0 within sqrt(eps) of O+, -d/R0 within
    sqrt(eps) of O-, zero beyond 2 sqrt(eps) of both, quintic smoothstep in
    between."""
    d = grid.d if d is None else d
    root = math.sqrt(eps)
    if 2.0 * root > obstacles.R1 / 3.0:
        raise GeometryError(
            f"2 sqrt(eps) = {2 * root:.6g} > R1/3 = {obstacles.R1 / 3:.6g}: "
            "the transition bands of O+ and O- could overlap"
        )
    amplitude = d / obstacles.R0
    g = np.zeros(grid.shape)
    if obstacles.plus:
        g += smoothstep_down((obstacle_distance(obstacles.plus, grid) - root) / root)
    if obstacles.minus:
        g -= smoothstep_down((obstacle_distance(obstacles.minus, grid) - root) / root)
    return ScalarField(grid, amplitude * g)


def validate_assumptions(
    surface: InitialSurface,
    obstacles: ObstacleSet,
    delta1: float,
    grid: TorusGrid,
) -> List[CheckReport]:
    """Check the standing geometric assumptions; never raises on violations.

    (a) every node within delta1 of O+ lies in U0, (b) every node within
    delta1 of O- lies outside U0, (c) obstacle separation exceeds R1.
    """
    r0 = _shape_sdf(surface.shape, grid)
    reports = []
    for name, balls, sign in (
        ("plus_inside_initial_set", obstacles.plus, 1.0),
        ("minus_outside_initial_set", obstacles.minus, -1.0),
    ):
        near = obstacle_distance(balls, grid) <= delta1
        if not near.any():
            reports.append(CheckReport(name=name, passed=True, detail="no nodes within delta1 of these obstacles"))
            continue
        signed = np.where(near, sign * r0, np.inf)
        flat = int(signed.argmin())
        worst = float(signed.flat[flat])
        passed = worst > 0.0
        reports.append(
            CheckReport(
                name=name,
                passed=passed,
                code=None if passed else codes.AssumptionViolation,
                value=worst,
                witness=None if passed else node_index(grid, flat),
                detail=f"min signed distance over nodes within delta1 = {delta1} of the obstacles",
            )
        )

    worst_gap = math.inf
    witness = None
    for i, bp in enumerate(obstacles.plus):
        for j, bm in enumerate(obstacles.minus):
            gap = torus_distance(bp.center, bm.center) - bp.radius - bm.radius
            if gap < worst_gap:
                worst_gap, witness = gap, (i, j)
    passed = worst_gap > obstacles.R1
    reports.append(
        CheckReport(
            name="obstacle_separation",
            passed=passed,
            code=None if passed else codes.AssumptionViolation,
            value=None if math.isinf(worst_gap) else worst_gap,
            bound=obstacles.R1,
            witness=None if passed else witness,
            detail="min gap between O+ and O- balls",
        )
    )
    for report in reports:
        if not report.passed:
            logger.warning("assumption %s failed: value=%s witness=%s", report.name, report.value, report.witness)
    return reports
