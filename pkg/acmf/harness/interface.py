"""Zero level set extraction and interface measurements.

d = 2 uses vectorized marching squares with one vertex per sign-changing grid
edge, so neighbouring cells share vertices. The ambiguous saddle cases keep
the two inside corners separated. d = 3 pads the field periodically and hands
it to PyMCubes.
"""

import logging
from pathlib import Path
from typing import Sequence, Union

import mcubes
import numpy as np

from ..types.errors import EmptyInterface, EmptyMesh
from ..types.mesh import InterfaceMesh, RadiusMeasurement
from ..types.simulation import SimState

logger = logging.getLogger(__name__)

# corners c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1); inside bit k is set when phi(c_k) >= 0.
# edges e0=c0c1 e1=c1c2 e2=c3c2 e3=c0c3.
SEGMENTS = {
    1: ((0, 3),),
    2: ((0, 1),),
    3: ((1, 3),),
    4: ((1, 2),),
    5: ((0, 3), (1, 2)),
    6: ((0, 2),),
    7: ((2, 3),),
    8: ((2, 3),),
    9: ((0, 2),),
    10: ((0, 1), (2, 3)),
    11: ((1, 2),),
    12: ((1, 3),),
    13: ((0, 1),),
    14: ((0, 3),),
}

# spread above which a mesh is not a single sphere, in units of h
SPHERE_SPREAD = 5.0


def _edge_vertices(phi: np.ndarray, axis: int, h: float):
    # one vertex per sign-changing edge from node (i,j) along axis
    other = np.roll(phi, -1, axis=axis)
    crossing = (phi >= 0) != (other >= 0)
    index = np.argwhere(crossing)
    a = phi[crossing]
    b = other[crossing]
    theta = a / (a - b)
    points = index.astype(float)
    points[:, axis] += theta
    return crossing, (points * h) % 1.0


def _marching_squares(phi: np.ndarray, h: float) -> InterfaceMesh:
    n = phi.shape[0]
    cross0, points0 = _edge_vertices(phi, 0, h)
    cross1, points1 = _edge_vertices(phi, 1, h)
    # compact vertex ids, axis-0 edges first
    ids0 = np.full(phi.shape, -1, dtype=np.int64)
    ids0[cross0] = np.arange(len(points0))
    ids1 = np.full(phi.shape, -1, dtype=np.int64)
    ids1[cross1] = len(points0) + np.arange(len(points1))
    vertices = np.concatenate([points0, points1])

    inside = phi >= 0
    case = (
        inside.astype(np.int64)
        + 2 * np.roll(inside, -1, axis=0)
        + 4 * np.roll(inside, (-1, -1), axis=(0, 1))
        + 8 * np.roll(inside, -1, axis=1)
    )
    # vertex id of each of the four cell edges, per cell
    edge_ids = (
        ids0,
        np.roll(ids1, -1, axis=0),
        np.roll(ids0, -1, axis=1),
        ids1,
    )
    segments = []
    for code, pairs in SEGMENTS.items():
        cells = case == code
        if not cells.any():
            continue
        for ea, eb in pairs:
            segments.append(np.stack([edge_ids[ea][cells], edge_ids[eb][cells]], axis=1))
    cells = np.concatenate(segments) if segments else np.zeros((0, 2), dtype=np.int64)
    return InterfaceMesh(d=2, h=h, vertices=vertices, cells=cells)


def _marching_cubes(phi: np.ndarray, h: float) -> InterfaceMesh:
    padded = np.pad(phi, ((0, 1),) * 3, mode="wrap")
    vertices, triangles = mcubes.marching_cubes(padded, 0.0)
    vertices = (np.asarray(vertices, dtype=float) * h) % 1.0
    return InterfaceMesh(d=3, h=h, vertices=vertices, cells=np.asarray(triangles, dtype=np.int64))


def extract_interface(state: SimState) -> InterfaceMesh:
    phi = state.phi.values
    positive = phi >= 0
    if positive.all() or not positive.any():
        raise EmptyInterface(f"phi has no sign change at t = {state.t:.6g} (pure phase)")
    h = state.grid.h
    if state.grid.d == 2:
        return _marching_squares(phi, h)
    return _marching_cubes(phi, h)


def measure_radius(mesh: InterfaceMesh, center: Sequence[float]) -> RadiusMeasurement:
    if mesh.n_vertices == 0:
        raise EmptyMesh("interface mesh has no vertices")
    delta = mesh.vertices - np.asarray(center, dtype=float)
    delta -= np.round(delta)
    radii = np.linalg.norm(delta, axis=1)
    mean, std = float(radii.mean()), float(radii.std())
    single = std <= SPHERE_SPREAD * mesh.h
    if not single:
        logger.warning("NOT_A_SINGLE_SPHERE: vertex radius spread %.3g > %.3g", std, SPHERE_SPREAD * mesh.h)
    return RadiusMeasurement(mean, std, single)


def write_vtk(mesh: InterfaceMesh, path: Union[str, Path], title: str = "acmf interface") -> Path:
    """Legacy ASCII VTK polydata: LINES for d = 2, POLYGONS for d = 3."""
    path = Path(path)
    points = mesh.vertices
    if mesh.d == 2:
        points = np.column_stack([points, np.zeros(len(points))])
    keyword = "LINES" if mesh.d == 2 else "POLYGONS"
    per_cell = mesh.cells.shape[1] if mesh.n_cells else (2 if mesh.d == 2 else 3)
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {len(points)} double",
    ]
    lines.extend(" ".join(repr(float(c)) for c in p) for p in points)
    lines.append(f"{keyword} {mesh.n_cells} {mesh.n_cells * (per_cell + 1)}")
    lines.extend(f"{per_cell} " + " ".join(str(int(i)) for i in cell) for cell in mesh.cells)
    path.write_text("\n".join(lines) + "\n")
    return path
