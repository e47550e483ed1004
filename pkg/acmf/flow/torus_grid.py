"""Periodic finite-difference stencils and quadrature on the d-torus.

All stencils use np.roll, so index arithmetic wraps modulo n on every axis.
The array-level helpers (``laplacian_values`` and friends) are what the
solver loop calls; the field-level functions wrap them for everyone else.
"""

from typing import Sequence, Tuple

import numpy as np

from ..types.grid import ScalarField, TorusGrid, VectorField


def laplacian_values(values: np.ndarray, h: float) -> np.ndarray:
    out = -2.0 * values.ndim * values
    for axis in range(values.ndim):
        out += np.roll(values, 1, axis=axis) + np.roll(values, -1, axis=axis)
    return out / h**2


def gradient_values(values: np.ndarray, h: float) -> np.ndarray:
    return np.stack(
        [(np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h) for axis in range(values.ndim)]
    )


def dirichlet_density_values(values: np.ndarray, h: float) -> np.ndarray:
    # mean of squared forward and backward differences; sums to the energy whose
    # gradient is the compact Laplacian
    out = np.zeros_like(values)
    for axis in range(values.ndim):
        forward = np.roll(values, -1, axis=axis) - values
        out += 0.5 * (forward**2 + np.roll(forward, 1, axis=axis) ** 2)
    return out / h**2


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, laplacian_values(f.values, f.grid.h))


def gradient(f: ScalarField) -> VectorField:
    return VectorField(f.grid, gradient_values(f.values, f.grid.h))


# integrate applies the rectangle rule h^d * sum, exact for trigonometric
# polynomials of degree below n.
def integrate(f: ScalarField) -> float:
    return float(f.values.sum() * f.grid.cell_volume)


def integrate_values(values: np.ndarray, grid: TorusGrid) -> float:
    return float(values.sum() * grid.cell_volume)


def _nearest_image(delta: np.ndarray) -> np.ndarray:
    return delta - np.round(delta)


def torus_distance(x: Sequence[float], y: Sequence[float]) -> float:
    """Distance on the flat unit torus between two points of [0,1)^d."""
    delta = _nearest_image(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return float(np.sqrt(np.sum(delta**2)))


def displacement(grid: TorusGrid, center: Sequence[float]) -> np.ndarray:
    """Nearest-image displacement x - center for every node, component axis first."""
    center = np.asarray(center, dtype=float)
    if center.shape != (grid.d,):
        raise ValueError(f"point {tuple(center)} is not {grid.d}-dimensional")
    return np.stack([_nearest_image(grid.coordinates[axis] - center[axis]) for axis in range(grid.d)])


def distance_field(grid: TorusGrid, center: Sequence[float]) -> np.ndarray:
    return np.sqrt(np.sum(displacement(grid, center) ** 2, axis=0))


def node_index(grid: TorusGrid, flat: int) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(flat, grid.shape))
