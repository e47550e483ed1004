import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from acmf.flow.torus_grid import (
    dirichlet_density_values,
    gradient,
    integrate,
    laplacian,
    node_index,
    torus_distance,
)
from acmf.types.grid import ScalarField, TorusGrid

coordinate = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)
points2 = st.tuples(coordinate, coordinate)
points3 = st.tuples(coordinate, coordinate, coordinate)


def test_grid_rejects_bad_shape():
    with pytest.raises(ValueError):
        TorusGrid(4, 32)
    with pytest.raises(ValueError):
        TorusGrid(2, 8)


def test_grid_coordinates():
    grid = TorusGrid(2, 64)
    x, y = grid.coordinates
    assert grid.h == 1 / 64
    assert x[3, 0] == 3 / 64
    assert y[0, 5] == 5 / 64


def test_scalar_field_rejects_non_finite():
    grid = TorusGrid(2, 16)
    values = np.zeros(grid.shape)
    values[2, 3] = np.nan
    with pytest.raises(ValueError):
        ScalarField(grid, values)
    with pytest.raises(ValueError):
        ScalarField(grid, np.zeros((16, 15)))


@pytest.mark.parametrize("d", [2, 3])
def test_laplacian_of_constant_vanishes(d):
    grid = TorusGrid(d, 16)
    assert np.all(laplacian(grid.constant(3.7)).values == 0.0)


def test_laplacian_of_cosine():
    grid = TorusGrid(2, 64)
    x, _ = grid.coordinates
    f = ScalarField(grid, np.cos(2 * math.pi * x))
    expected = -4 * math.pi**2 * np.cos(2 * math.pi * x)
    bound = (2 * math.pi) ** 4 * grid.h**2 / 12 * 1.5
    assert np.abs(laplacian(f).values - expected).max() <= bound


def test_laplacian_is_second_order():
    errors = []
    for n in (32, 64):
        grid = TorusGrid(2, n)
        x, y = grid.coordinates
        f = ScalarField(grid, np.sin(2 * math.pi * x) * np.cos(2 * math.pi * y))
        expected = -8 * math.pi**2 * f.values
        errors.append(np.abs(laplacian(f).values - expected).max())
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_laplacian_of_spike_wraps():
    grid = TorusGrid(2, 16)
    values = np.zeros(grid.shape)
    values[0, 0] = 1.0
    lap = laplacian(ScalarField(grid, values)).values
    inv_h2 = 1 / grid.h**2
    assert lap[0, 0] == pytest.approx(-4 * inv_h2)
    for node in [(1, 0), (15, 0), (0, 1), (0, 15)]:
        assert lap[node] == pytest.approx(inv_h2)
    assert np.count_nonzero(lap) == 5


def test_laplacian_integrates_to_zero():
    grid = TorusGrid(2, 64)
    rng = np.random.default_rng(7)
    f = ScalarField(grid, rng.uniform(-1, 1, grid.shape))
    assert abs(integrate(laplacian(f))) < 1e-9


def test_gradient_of_sine():
    grid = TorusGrid(2, 64)
    _, y = grid.coordinates
    f = ScalarField(grid, np.sin(2 * math.pi * y))
    grad = gradient(f).values
    assert np.all(grad[0] == 0.0)
    bound = (2 * math.pi) ** 3 * grid.h**2 / 6 * 1.5
    assert np.abs(grad[1] - 2 * math.pi * np.cos(2 * math.pi * y)).max() <= bound


def test_gradient_of_constant_is_zero():
    grid = TorusGrid(3, 16)
    assert np.all(gradient(grid.constant(-0.4)).values == 0.0)


def test_dirichlet_density_sums_to_compact_energy():
    grid = TorusGrid(2, 32)
    rng = np.random.default_rng(3)
    values = rng.uniform(-1, 1, grid.shape)
    density = dirichlet_density_values(values, grid.h)
    # summation by parts: sum |D+ f|^2 = -sum f * laplacian(f)
    lap = laplacian(ScalarField(grid, values)).values
    assert_allclose(density.sum(), -(values * lap).sum(), rtol=1e-12)


def test_integrate():
    grid = TorusGrid(2, 64)
    x, _ = grid.coordinates
    assert integrate(grid.constant(1.0)) == pytest.approx(1.0, rel=1e-12)
    assert integrate(ScalarField(grid, np.sin(2 * math.pi * x) ** 2)) == pytest.approx(0.5, rel=1e-12)
    assert integrate(grid.constant(-2.5)) == pytest.approx(-2.5, rel=1e-12)


def test_torus_distance_examples():
    assert torus_distance((0.05, 0.0), (0.95, 0.0)) == pytest.approx(0.1, abs=1e-12)
    assert torus_distance((0.0, 0.0), (0.5, 0.5)) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert torus_distance((0.3, 0.3, 0.3), (0.3, 0.3, 0.3)) == 0.0


@given(points2, points2, points2)
def test_torus_distance_is_a_metric(x, y, z):
    dxy = torus_distance(x, y)
    assert dxy == pytest.approx(torus_distance(y, x), abs=1e-15)
    assert dxy <= torus_distance(x, z) + torus_distance(z, y) + 1e-12
    assert 0.0 <= dxy <= math.sqrt(2) / 2 + 1e-12


@given(points3, points3)
def test_torus_distance_bounded_in_three_dimensions(x, y):
    assert torus_distance(x, y) <= math.sqrt(3) / 2 + 1e-12
    assert torus_distance(x, x) == 0.0


def test_node_index_round_trip():
    grid = TorusGrid(3, 16)
    assert node_index(grid, 16 * 16 * 2 + 16 * 3 + 5) == (2, 3, 5)
