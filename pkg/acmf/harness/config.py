import json
import logging
import math
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from ..flow.barriers import barrier_violations, barriers_for
from ..types.config import (
    BallNode,
    ComplementNode,
    IntersectionNode,
    ScenarioConfig,
    ShapeSpec,
    UnionNode,
)
from ..types.errors import ConfigParseError, ConfigValidationError
from ..types.geometry import (
    Ball,
    ComplementShape,
    InitialSurface,
    IntersectionShape,
    ObstacleSet,
    Shape,
    UnionShape,
)
from ..types.grid import TorusGrid
from ..types.simulation import SimParams, cfl_limit

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent / "scenarios"


def bundled_scenario(name: str) -> Path:
    path = SCENARIO_DIR / f"{name}.toml"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path


def _format_pydantic_errors(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()]


def parse_config(document: Dict[str, Any]) -> ScenarioConfig:
    """Validate a decoded scenario document, reporting every problem at once."""
    try:
        config = ScenarioConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigValidationError(_format_pydantic_errors(exc)) from exc
    problems = config_violations(config)
    if problems:
        raise ConfigValidationError(problems)
    return config


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            document = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    document.setdefault("name", path.stem)
    config = parse_config(document)
    logger.debug("loaded scenario %s from %s", config.name, path)
    return config


def dump_config(config: ScenarioConfig) -> str:
    return config.model_dump_json()


def config_from_json(text: str) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigValidationError(_format_pydantic_errors(exc)) from exc


def grid_of(config: ScenarioConfig) -> TorusGrid:
    return TorusGrid(config.grid.d, config.grid.n)


def params_of(config: ScenarioConfig) -> SimParams:
    physics = config.physics
    return SimParams.for_grid(
        grid_of(config),
        eps=physics.eps,
        R0=physics.R0,
        R1=physics.R1,
        t_end=physics.t_end,
        cfl_safety=physics.cfl_safety,
        dt=physics.dt_override,
    )


def obstacles_of(config: ScenarioConfig) -> ObstacleSet:
    return ObstacleSet(
        plus=[Ball(tuple(b.center), b.radius) for b in config.obstacles.plus],
        minus=[Ball(tuple(b.center), b.radius) for b in config.obstacles.minus],
        R0=config.physics.R0,
        R1=config.physics.R1,
    )


def shape_of(node: ShapeSpec) -> Shape:
    if isinstance(node, BallNode):
        return Ball(tuple(node.center), node.radius)
    if isinstance(node, UnionNode):
        return UnionShape(tuple(shape_of(c) for c in node.children))
    if isinstance(node, IntersectionNode):
        return IntersectionShape(tuple(shape_of(c) for c in node.children))
    if isinstance(node, ComplementNode):
        return ComplementShape(shape_of(node.child))
    raise TypeError(f"unknown shape node {node!r}")


def surface_of(config: ScenarioConfig) -> InitialSurface:
    return InitialSurface(shape_of(config.initial.shape))


def monotonicity_time(config: ScenarioConfig, params: SimParams) -> float:
    if config.diagnostics.monotonicity_s is not None:
        return config.diagnostics.monotonicity_s
    return params.t_end + config.physics.record_every * params.dt


def config_violations(config: ScenarioConfig) -> List[str]:
    """Cross-field rules pydantic cannot express on single fields."""
    d = config.grid.d
    grid = grid_of(config)
    physics = config.physics
    eps = physics.eps
    problems: List[str] = []

    def check_point(where: str, point: Optional[List[float]]):
        if point is not None and len(point) != d:
            problems.append(f"{where}: point {point} is not {d}-dimensional")

    if eps < 4 * grid.h * (1 - 1e-12):
        problems.append(f"physics.eps: eps = {eps} < 4h = {4 * grid.h:.6g} (the layer needs >= 4 cells, eps >= 4h)")
    if not eps < physics.R0 / 4:
        problems.append(f"physics.eps: eps = {eps} must be < R0/4 = {physics.R0 / 4:.6g}")
    if physics.dt_override is not None and physics.enforce_cfl:
        limit = physics.cfl_safety * cfl_limit(grid, eps)
        if physics.dt_override > limit * (1 + 1e-12):
            problems.append(
                f"physics.dt_override: dt = {physics.dt_override:.6g} exceeds the CFL bound "
                f"cfl_safety * min(h^2/(2d), eps^2/8) = {limit:.6g}"
            )

    has_obstacles = bool(config.obstacles.plus or config.obstacles.minus)
    if has_obstacles:
        if 2 * math.sqrt(eps) > physics.R1 / 3:
            problems.append(
                f"physics.eps: 2 sqrt(eps) = {2 * math.sqrt(eps):.6g} > R1/3 = {physics.R1 / 3:.6g} "
                "(forcing bands of O+ and O- must stay apart)"
            )
        before = len(problems)
        for i, ball in enumerate(config.obstacles.plus):
            check_point(f"obstacles.plus[{i}]", ball.center)
        for i, ball in enumerate(config.obstacles.minus):
            check_point(f"obstacles.minus[{i}]", ball.center)
        if len(problems) == before:
            problems.extend(f"obstacles: {p}" for p in obstacles_of(config).violations())
        if len(problems) == before and config.diagnostics.barriers:
            obstacles = obstacles_of(config)
            found = [p for b in barriers_for(obstacles, eps) for p in barrier_violations(b, obstacles)]
            problems.extend(f"barriers: {p}" for p in dict.fromkeys(found))

    for ball in surface_of(config).primitives():
        check_point("initial.shape", list(ball.center))
        if not ball.radius < 0.5:
            problems.append(f"initial.shape: radius {ball.radius} must be < 1/2")
        elif ball.radius * grid.n < 8:
            problems.append(f"initial.shape: radius {ball.radius} is resolved by fewer than 8 cells")

    diagnostics = config.diagnostics
    for i, point in enumerate(diagnostics.monotonicity_points):
        check_point(f"diagnostics.monotonicity_points[{i}]", point)
    if diagnostics.monotonicity_s is not None and not diagnostics.monotonicity_s > physics.t_end:
        problems.append(
            f"diagnostics.monotonicity_s: s = {diagnostics.monotonicity_s} must lie after t_end = {physics.t_end}"
        )
    check_point("diagnostics.brakke_center", diagnostics.brakke_center)
    if diagnostics.brakke_radius is not None and diagnostics.brakke_radius >= 0.5:
        problems.append(f"diagnostics.brakke_radius: {diagnostics.brakke_radius} must be < 1/2")
    check_point("diagnostics.density_point", diagnostics.density_point)
    for r in diagnostics.density_radii:
        if r < 3 * eps:
            problems.append(f"diagnostics.density_radii: r = {r} < 3 eps = {3 * eps:.6g}")
    return problems


def summary_config(config: ScenarioConfig) -> Dict[str, Any]:
    return json.loads(dump_config(config))
