from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .defaults import PreconfiguredDefaults
from .grid import ScalarField, TorusGrid


def cfl_limit(grid: TorusGrid, eps: float) -> float:
    # diffusion limit h^2/(2d) and reaction limit eps^2/8 (max |W''| = 4 on [-1,1], safety 2)
    return min(grid.h**2 / (2 * grid.d), eps**2 / 8.0)


@dataclass(frozen=True)
class SimParams:
    eps: float
    dt: float
    t_end: float
    d: int
    R0: float
    R1: float
    cfl_safety: float = PreconfiguredDefaults.cfl_safety

    @classmethod
    def for_grid(
        cls,
        grid: TorusGrid,
        eps: float,
        R0: float,
        R1: float,
        t_end: float,
        cfl_safety: float = PreconfiguredDefaults.cfl_safety,
        dt: Optional[float] = None,
    ) -> "SimParams":
        if dt is None:
            dt = cfl_safety * cfl_limit(grid, eps)
        return cls(eps=eps, dt=dt, t_end=t_end, d=grid.d, R0=R0, R1=R1, cfl_safety=cfl_safety)

    @property
    def n_steps(self) -> int:
        if self.t_end <= 0:
            return 0
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    def violations(self, grid: TorusGrid) -> List[str]:
        problems = []
        if self.eps <= 0:
            problems.append(f"eps must be positive, got {self.eps}")
            return problems
        if self.d != grid.d:
            problems.append(f"params dimension {self.d} does not match grid dimension {grid.d}")
        if not 0 < self.cfl_safety <= 1:
            problems.append(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.dt <= 0:
            problems.append(f"dt must be positive, got {self.dt}")
        limit = self.cfl_safety * cfl_limit(grid, self.eps)
        if self.dt > limit * (1 + 1e-12):
            problems.append(
                f"dt = {self.dt:.6g} exceeds cfl_safety * min(h^2/(2d), eps^2/8) = {limit:.6g}"
            )
        if self.eps < 4 * grid.h * (1 - 1e-12):
            problems.append(
                f"eps = {self.eps:.6g} violates the resolution rule eps >= 4h = {4 * grid.h:.6g}"
            )
        if self.t_end < 0:
            problems.append(f"t_end must be nonnegative, got {self.t_end}")
        return problems


@dataclass
class SimState:
    phi: ScalarField
    t: float = 0.0
    step: int = 0

    @property
    def grid(self) -> TorusGrid:
        return self.phi.grid

    # r returns the changed variable r = (q^eps)^{-1}(phi) = eps * atanh(phi).
    def r(self, eps: float) -> ScalarField:
        return ScalarField(self.grid, eps * np.arctanh(self.phi.values))

    def snapshot(self) -> "SimState":
        return SimState(self.phi.copy(), self.t, self.step)


@dataclass
class Trajectory:
    """States kept at the record cadence plus the final state of the run."""

    states: List[SimState] = field(default_factory=list)
    final: Optional[SimState] = None

    def __len__(self) -> int:
        return len(self.states)
