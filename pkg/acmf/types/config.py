from __future__ import annotations

from typing import Annotated, List, Literal, Optional, Union

from pydantic import Field, NonNegativeFloat, PositiveFloat, PositiveInt

from .base import BaseModel
from .defaults import PreconfiguredDefaults as defaults


class GridSection(BaseModel):
    d: Literal[2, 3]
    n: int = Field(ge=16)


class PhysicsSection(BaseModel):
    eps: PositiveFloat
    R0: PositiveFloat
    R1: PositiveFloat
    delta1: PositiveFloat
    t_end: NonNegativeFloat
    dt_override: Optional[PositiveFloat] = None
    cfl_safety: float = Field(default=defaults.cfl_safety, gt=0.0, le=1.0)
    record_every: PositiveInt = defaults.record_every
    # false zeroes the obstacle forcing (negative controls)
    forcing: bool = True
    # false lets a dt_override above the CFL bound through
    enforce_cfl: bool = True
    # stop once |dE/dt| between records falls below this (None runs to t_end)
    steady_tol: Optional[PositiveFloat] = None


class BallSpec(BaseModel):
    center: List[float]
    radius: PositiveFloat


class ObstaclesSection(BaseModel):
    plus: List[BallSpec] = []
    minus: List[BallSpec] = []


class BallNode(BaseModel):
    kind: Literal["ball"] = "ball"
    center: List[float]
    radius: PositiveFloat


class UnionNode(BaseModel):
    kind: Literal["union"] = "union"
    children: List["ShapeSpec"] = Field(min_length=1)


class IntersectionNode(BaseModel):
    kind: Literal["intersection"] = "intersection"
    children: List["ShapeSpec"] = Field(min_length=1)


class ComplementNode(BaseModel):
    kind: Literal["complement"] = "complement"
    child: "ShapeSpec"


ShapeSpec = Annotated[
    Union[BallNode, UnionNode, IntersectionNode, ComplementNode],
    Field(discriminator="kind"),
]

UnionNode.model_rebuild()
IntersectionNode.model_rebuild()
ComplementNode.model_rebuild()


class InitialSection(BaseModel):
    shape: ShapeSpec
    # amplitude of the seeded perturbation added to phi_0 (0 disables it)
    perturbation: float = Field(default=0.0, ge=0.0, le=0.25)


class DiagnosticsSection(BaseModel):
    energy: bool = True
    barriers: bool = True
    monotonicity: bool = True
    holder: bool = True
    brakke: bool = True
    avoidance: bool = True
    gradient_bound: bool = True
    # any failed check turns the exit code into the diagnostics family
    strict: bool = True

    tol_dissip: PositiveFloat = defaults.tol_dissip
    tol_mono: PositiveFloat = defaults.tol_mono
    tol_avoid: PositiveFloat = defaults.tol_avoid
    energy_slack: NonNegativeFloat = defaults.energy_slack
    avoid_phase_tol: PositiveFloat = defaults.avoid_phase_tol
    tol_ordering: NonNegativeFloat = defaults.tol_ordering
    # None means (h/eps)^2
    tol_bv: Optional[NonNegativeFloat] = None
    # absolute comparison tolerance; None means comparison_h2 * h^2
    tol_comparison: Optional[PositiveFloat] = None
    comparison_h2: PositiveFloat = defaults.comparison_h2
    gradient_limit: PositiveFloat = defaults.gradient_limit

    # points y of the heat-kernel monotonicity check; empty means the
    # centre of the first initial ball
    monotonicity_points: List[List[float]] = []
    # kernel focus time s; None means t_end plus one record interval
    monotonicity_s: Optional[PositiveFloat] = None

    brakke_center: Optional[List[float]] = None
    brakke_radius: Optional[PositiveFloat] = None

    density_point: Optional[List[float]] = None
    density_radii: List[PositiveFloat] = []


class OutputSection(BaseModel):
    directory: str = "output"
    snapshots: bool = True
    meshes: bool = True


class ScenarioConfig(BaseModel):
    name: str
    grid: GridSection
    physics: PhysicsSection
    obstacles: ObstaclesSection = ObstaclesSection()
    initial: InitialSection
    diagnostics: DiagnosticsSection = DiagnosticsSection()
    output: OutputSection = OutputSection()
    seed: int = 0
