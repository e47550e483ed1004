from dataclasses import dataclass, field

import numpy as np


# InterfaceMesh approximates the zero level set {phi = 0}.
#
# For d = 2 cells are segments (index pairs), for d = 3 triangles (index
# triples). Vertices are wrapped into [0,1)^d.
@dataclass
class InterfaceMesh:
    d: int
    h: float
    vertices: np.ndarray = field(repr=False)
    cells: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    def segment_lengths(self) -> np.ndarray:
        # nearest-image edge vectors so seam-crossing segments keep their true length
        delta = self.vertices[self.cells[:, 1]] - self.vertices[self.cells[:, 0]]
        delta -= np.round(delta)
        return np.linalg.norm(delta, axis=1)


@dataclass(frozen=True)
class RadiusMeasurement:
    mean: float
    std: float
    # false when the spread exceeds 5h (NOT_A_SINGLE_SPHERE)
    single_sphere: bool = True
