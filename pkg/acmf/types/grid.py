from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np


# TorusGrid is the uniform periodic lattice on [0,1)^d with n nodes per axis.
#
# Node i along an axis sits at x = i*h.
@dataclass(frozen=True)
class TorusGrid:
    d: int
    n: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"grid dimension must be 2 or 3, got {self.d}")
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 nodes per axis, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axis = np.arange(self.n) * self.h
        return tuple(np.meshgrid(*([axis] * self.d), indexing="ij"))

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))

    def constant(self, value: float) -> "ScalarField":
        return ScalarField(self, np.full(self.shape, float(value)))


@dataclass
class ScalarField:
    """One real value per grid node."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.isfinite(self.values).all():
            raise ValueError("field holds non-finite values")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)


@dataclass
class VectorField:
    """d components per node, stored with the component axis first."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.d, *self.grid.shape):
            raise ValueError(f"vector field shape {self.values.shape} does not match grid")
        if not np.isfinite(self.values).all():
            raise ValueError("vector field holds non-finite values")

    def norm(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt(np.sum(self.values**2, axis=0)))
