from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Tuple, Union

from ..flow.torus_grid import torus_distance

Point = Tuple[float, ...]


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float

    @property
    def d(self) -> int:
        return len(self.center)


# ObstacleSet holds the two obstacle families as unions of balls.
#
# plus is O+ (the interface may not enter it from outside), minus is O-.
# Every radius is expected to be >= R0 and the families to stay more than R1
# apart; violations() lists what breaks those rules instead of raising, so
# assumption reports can still be produced for bad input.
@dataclass
class ObstacleSet:
    plus: List[Ball] = field(default_factory=list)
    minus: List[Ball] = field(default_factory=list)
    R0: float = 0.1
    R1: float = 0.1

    def balls(self) -> Iterator[Tuple[str, Ball]]:
        for ball in self.plus:
            yield "plus", ball
        for ball in self.minus:
            yield "minus", ball

    @property
    def empty(self) -> bool:
        return not self.plus and not self.minus

    def violations(self) -> List[str]:
        problems = []
        if self.R0 <= 0 or self.R1 <= 0:
            problems.append(f"R0 and R1 must be positive (R0={self.R0}, R1={self.R1})")
        for family, ball in self.balls():
            if ball.radius < self.R0:
                problems.append(f"{family} ball at {ball.center} has radius {ball.radius} < R0 = {self.R0}")
        for bp in self.plus:
            for bm in self.minus:
                gap = torus_distance(bp.center, bm.center) - bp.radius - bm.radius
                if gap <= self.R1:
                    problems.append(
                        f"obstacle gap {gap:.6g} between {bp.center} and {bm.center} is not > R1 = {self.R1}"
                    )
        return problems


# CSG expression tree describing the initial open set U0.
@dataclass(frozen=True)
class UnionShape:
    children: Tuple["Shape", ...]


@dataclass(frozen=True)
class IntersectionShape:
    children: Tuple["Shape", ...]


@dataclass(frozen=True)
class ComplementShape:
    child: "Shape"


Shape = Union[Ball, UnionShape, IntersectionShape, ComplementShape]


@dataclass(frozen=True)
class InitialSurface:
    shape: Shape

    def primitives(self) -> List[Ball]:
        found: List[Ball] = []
        stack: List[Shape] = [self.shape]
        while stack:
            node = stack.pop()
            if isinstance(node, Ball):
                found.append(node)
            elif isinstance(node, ComplementShape):
                stack.append(node.child)
            else:
                stack.extend(node.children)
        return found
