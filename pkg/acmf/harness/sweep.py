"""Convergence sweeps: one scenario per eps with eps/h held fixed."""

import csv
import logging
import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from ..types.base import BaseModel
from ..types.config import ScenarioConfig
from ..types.defaults import PreconfiguredDefaults
from ..types.errors import AcmfError
from ..types.geometry import Ball
from . import config as configuration
from .scenario import run_scenario

logger = logging.getLogger(__name__)

_CTX = mp.get_context("spawn")

# columns compared between consecutive rows for the trend flags
TREND_COLUMNS = ("radius_error", "discrepancy")


class SweepRow(BaseModel):
    eps: float
    n: int
    t: float = 0.0
    radius_error: Optional[float] = None
    discrepancy: Optional[float] = None
    C2: Optional[float] = None
    energy: Optional[float] = None
    exit_code: int = 0
    error: str = ""


class SweepTable(BaseModel):
    rows: List[SweepRow] = []
    trends: Dict[str, bool] = {}

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(SweepRow.model_fields))
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row.model_dump())
        return path


def worker_count(requested: Optional[int] = None) -> int:
    """Worker processes for a sweep, capped by ACMF_THREADS when set."""
    count = requested or os.cpu_count() or 1
    cap = os.environ.get("ACMF_THREADS")
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring non-integer ACMF_THREADS=%r", cap)
    return count


def entry_config(
    base: ScenarioConfig,
    eps: float,
    ratio: float,
    time: Optional[float],
    directory: Path,
) -> ScenarioConfig:
    document = base.model_dump()
    n = int(round(ratio / eps))
    document["name"] = f"{base.name}_eps{eps:g}"
    document["grid"]["n"] = n
    document["physics"]["eps"] = eps
    document["physics"]["dt_override"] = None
    if time is not None:
        document["physics"]["t_end"] = time
    document["output"]["directory"] = str(directory / f"eps_{eps:g}")
    return configuration.parse_config(document)


def exact_radius(R: float, d: int, t: float) -> float:
    # sphere under mean curvature flow: R(t)^2 = R(0)^2 - 2 (d - 1) t
    return math.sqrt(max(R**2 - 2.0 * (d - 1) * t, 0.0))


def _run_entry(config_json: str) -> Dict:
    config = configuration.config_from_json(config_json)
    report = run_scenario(config)
    row = {
        "eps": config.physics.eps,
        "n": config.grid.n,
        "t": report.final_t,
        "exit_code": report.exit_code,
        "error": report.message if report.exit_code else "",
    }
    constants = report.constants
    row["discrepancy"] = constants.get("final_discrepancy")
    row["C2"] = constants.get("C2")
    row["energy"] = constants.get("final_energy")
    shape = configuration.surface_of(config).shape
    if isinstance(shape, Ball) and "final_radius" in constants:
        exact = exact_radius(shape.radius, config.grid.d, report.final_t)
        if exact > 0:
            row["radius_error"] = abs(constants["final_radius"] - exact) / exact
    return row


def _trends(rows: Sequence[SweepRow]) -> Dict[str, bool]:
    # rows ordered by decreasing eps; True when the column strictly decreases
    ordered = sorted((r for r in rows if not r.error), key=lambda r: -r.eps)
    if len(ordered) < 2:
        return {}
    trends = {}
    for column in TREND_COLUMNS:
        values = [getattr(r, column) for r in ordered]
        if any(v is None for v in values):
            continue
        trends[f"{column}_decreasing"] = all(b < a for a, b in zip(values, values[1:]))
    return trends


def convergence_sweep(
    base: ScenarioConfig,
    eps_list: Sequence[float],
    ratio: float = PreconfiguredDefaults.sweep_ratio,
    time: Optional[float] = None,
    directory: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
) -> SweepTable:
    """Run ``base`` once per eps with n = round(ratio / eps).

    Entries that fail become rows carrying the error; the table is always
    returned, with trend flags only when at least two rows succeeded.
    """
    directory = Path(directory if directory is not None else base.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows: List[SweepRow] = []
    pending = []
    for eps in eps_list:
        try:
            pending.append(entry_config(base, eps, ratio, time, directory).model_dump_json())
        except AcmfError as exc:
            logger.error("sweep entry eps=%g rejected: %s", eps, exc)
            rows.append(SweepRow(eps=eps, n=int(round(ratio / eps)), exit_code=exc.exit_code, error=str(exc)))

    count = min(worker_count(workers), max(len(pending), 1))
    logger.info("sweeping %d entries on %d worker(s)", len(pending), count)
    if count == 1:
        results = [_run_entry(doc) for doc in pending]
    else:
        with ProcessPoolExecutor(max_workers=count, mp_context=_CTX) as pool:
            results = list(pool.map(_run_entry, pending))
    rows.extend(SweepRow(**r) for r in results)
    rows.sort(key=lambda r: -r.eps)

    table = SweepTable(rows=rows, trends=_trends(rows))
    table.write_csv(directory / "sweep.csv")
    (directory / "sweep.json").write_text(table.model_dump_json(indent=2))
    return table
