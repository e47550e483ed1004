import copy

import numpy as np
import pytest

from acmf.types.grid import ScalarField, TorusGrid
from acmf.types.simulation import SimParams, SimState


def _slab(n: int, eps: float, d: int = 2, axis: int = 0) -> SimState:
    # tanh profile of the slab 1/4 < x_axis < 3/4: two flat interfaces of unit area
    grid = TorusGrid(d, n)
    x = grid.coordinates[axis]
    r = 0.25 - np.abs(x - 0.5)
    return SimState(ScalarField(grid, np.tanh(r / eps)))


@pytest.fixture
def slab():
    return _slab


@pytest.fixture
def params_for():
    def build(grid: TorusGrid, eps: float, R0: float = 0.5, R1: float = 1.0, t_end: float = 0.0, **kwargs):
        return SimParams.for_grid(grid, eps=eps, R0=R0, R1=R1, t_end=t_end, **kwargs)

    return build


TINY = {
    "name": "tiny_circle",
    "grid": {"d": 2, "n": 64},
    "physics": {
        "eps": 0.0625,
        "R0": 0.3,
        "R1": 0.9,
        "delta1": 0.01,
        "t_end": 0.002,
        "record_every": 10,
    },
    "initial": {"shape": {"kind": "ball", "center": [0.5, 0.5], "radius": 0.3}},
    "diagnostics": {"monotonicity_s": 0.02},
    "output": {"directory": "output/tiny", "snapshots": True, "meshes": True},
}


@pytest.fixture
def tiny_document(tmp_path):
    """A small shrinking-circle scenario document writing into tmp_path."""

    def build(**sections):
        document = copy.deepcopy(TINY)
        document["output"]["directory"] = str(tmp_path / "out")
        for section, values in sections.items():
            if isinstance(values, dict):
                document.setdefault(section, {}).update(values)
            else:
                document[section] = values
        return document

    return build
