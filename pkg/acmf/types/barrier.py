from dataclasses import dataclass
from enum import Enum

from .geometry import Point


class BarrierKind(str, Enum):
    SUB = "sub"
    SUPER = "super"


# Barrier is a radial sub- or supersolution centred in one obstacle ball.
#
# SUB barriers sit inside O+ and bound phi from below; SUPER barriers sit
# inside O- and bound it from above.
@dataclass(frozen=True)
class Barrier:
    center: Point
    R0: float
    eps: float
    kind: BarrierKind = BarrierKind.SUB

    @property
    def sign(self) -> float:
        return 1.0 if self.kind is BarrierKind.SUB else -1.0
