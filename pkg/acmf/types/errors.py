from typing import List, Optional, Tuple

from . import codes


class AcmfError(Exception):
    """Base error. Every subclass fixes its error code and exit family."""

    code: str = codes.ValidationError
    exit_code: int = codes.ExitConfig

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ConfigParseError(AcmfError):
    code = codes.ParseError
    exit_code = codes.ExitConfig


class ConfigValidationError(AcmfError):
    code = codes.ValidationError
    exit_code = codes.ExitConfig

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario config:\n  " + "\n  ".join(self.errors))


class GeometryError(AcmfError):
    code = codes.GeometryRejected
    exit_code = codes.ExitConfig


class SolverError(AcmfError):
    code = codes.MaxPrincipleViolation
    exit_code = codes.ExitSolver


class MaxPrincipleViolation(SolverError):
    def __init__(self, step: int, t: float, max_abs: float, node: Tuple[int, ...]):
        self.step = step
        self.t = t
        self.max_abs = max_abs
        self.node = node
        super().__init__(
            f"max|phi| = {max_abs:.6g} >= 1 at node {node} after step {step} "
            f"(t = {t:.6g}); the time step is too large"
        )


class BarrierError(AcmfError):
    code = codes.ComparisonViolation
    exit_code = codes.ExitBarrier


class OrderingViolation(BarrierError):
    code = codes.OrderingViolation


class ComparisonViolation(BarrierError):
    def __init__(self, message: str, barrier_index: int, margin: float, node: Tuple[int, ...], t: float):
        self.barrier_index = barrier_index
        self.margin = margin
        self.node = node
        self.t = t
        super().__init__(message)


class DiagnosticsError(AcmfError):
    code = codes.SupportViolation
    exit_code = codes.ExitDiagnostics


class SupportViolation(DiagnosticsError):
    code = codes.SupportViolation


class InterfaceError(AcmfError):
    code = codes.Empty
    exit_code = codes.ExitDiagnostics


class EmptyInterface(InterfaceError):
    code = codes.Empty


class EmptyMesh(InterfaceError):
    code = codes.EmptyMesh
