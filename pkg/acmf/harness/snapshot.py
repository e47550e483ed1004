"""Raw field snapshots: a 64-byte little-endian header followed by the
values as little-endian float64 in C order."""

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..types import codes
from ..types.errors import AcmfError
from ..types.grid import ScalarField, TorusGrid
from ..types.simulation import SimState

HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("d", "<u4"),
        ("n", "<u4"),
        ("eps", "<f8"),
        ("t", "<f8"),
        ("step", "<u8"),
        ("reserved", "V24"),
    ]
)
assert HEADER.itemsize == codes.SnapshotHeaderSize


class SnapshotError(AcmfError):
    code = codes.ParseError


def write_snapshot(path: Union[str, Path], state: SimState, eps: float) -> Path:
    path = Path(path)
    header = np.zeros(1, dtype=HEADER)
    header["magic"] = codes.SnapshotMagic
    header["version"] = codes.SnapshotVersion
    header["d"] = state.grid.d
    header["n"] = state.grid.n
    header["eps"] = eps
    header["t"] = state.t
    header["step"] = state.step
    with path.open("wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.ascontiguousarray(state.phi.values, dtype="<f8").tobytes())
    return path


def read_snapshot(path: Union[str, Path]) -> Tuple[SimState, float]:
    """Return the stored state and its eps."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise SnapshotError(f"{path}: truncated header")
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    if bytes(header["magic"]) != codes.SnapshotMagic:
        raise SnapshotError(f"{path}: not an ACMF snapshot")
    if int(header["version"]) != codes.SnapshotVersion:
        raise SnapshotError(f"{path}: unsupported snapshot version {int(header['version'])}")
    grid = TorusGrid(int(header["d"]), int(header["n"]))
    values = np.frombuffer(raw[HEADER.itemsize :], dtype="<f8")
    if values.size != grid.n**grid.d:
        raise SnapshotError(f"{path}: expected {grid.n ** grid.d} values, found {values.size}")
    phi = ScalarField(grid, values.reshape(grid.shape).astype(float))
    return SimState(phi, float(header["t"]), int(header["step"])), float(header["eps"])
