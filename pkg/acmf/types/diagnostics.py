from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .base import BaseModel
from .grid import ScalarField
from .simulation import SimState


@dataclass
class SurfaceMeasures:
    mu_mass: float
    mu_tilde_mass: float
    mu_hat_mass: float
    mu_density: ScalarField = field(repr=False)


# CheckReport is the outcome of one runtime check.
#
# Checks that must not abort a run return one of these; value holds the
# quantity that was compared, witness the node or interval that decided it.
class CheckReport(BaseModel):
    name: str
    passed: bool
    code: Optional[str] = None
    value: Optional[float] = None
    bound: Optional[float] = None
    witness: Optional[Tuple[float, ...]] = None
    detail: str = ""
    values: Dict[str, float] = {}


@dataclass
class DiagnosticsRecord:
    t: float
    step: int
    energy: float
    discrepancy_l1: float
    mu_mass: float
    mu_tilde_mass: float
    mu_hat_mass: float
    min_phi: float
    max_phi: float
    dissipation: float = 0.0
    barrier_margins: List[float] = field(default_factory=list)
    brakke_residual: float = 0.0
    monotonicity_ratio: float = 1.0
    w_mass_change: float = 0.0

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "t": self.t,
            "step": self.step,
            "energy": self.energy,
            "discrepancy_l1": self.discrepancy_l1,
            "mu_mass": self.mu_mass,
            "mu_tilde_mass": self.mu_tilde_mass,
            "mu_hat_mass": self.mu_hat_mass,
            "min_phi": self.min_phi,
            "max_phi": self.max_phi,
            "dissipation": self.dissipation,
        }
        for i, margin in enumerate(self.barrier_margins):
            row[f"barrier_margin_{i}"] = margin
        row["brakke_residual"] = self.brakke_residual
        row["monotonicity_ratio"] = self.monotonicity_ratio
        row["w_mass_change"] = self.w_mass_change
        return row


class DiagnosticsSink(ABC):
    """Receives snapshot copies of the solver state at the record cadence.

    A sink may set stop_requested to end the run after the current record.
    """

    stop_requested: bool = False

    def on_start(self, state: SimState, g: ScalarField) -> None:
        pass

    @abstractmethod
    def on_record(self, state: SimState) -> None:
        pass

    def on_finish(self, state: SimState) -> None:
        pass


class NullSink(DiagnosticsSink):
    def on_record(self, state: SimState) -> None:
        pass


class SinkChain(DiagnosticsSink):
    def __init__(self, *sinks: DiagnosticsSink):
        self.sinks = list(sinks)

    @property
    def stop_requested(self) -> bool:
        return any(sink.stop_requested for sink in self.sinks)

    def on_start(self, state: SimState, g: ScalarField) -> None:
        for sink in self.sinks:
            sink.on_start(state, g)

    def on_record(self, state: SimState) -> None:
        for sink in self.sinks:
            sink.on_record(state)

    def on_finish(self, state: SimState) -> None:
        for sink in self.sinks:
            sink.on_finish(state)
