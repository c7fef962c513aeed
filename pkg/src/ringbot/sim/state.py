from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from ringbot.errors import InvalidActionError
from ringbot.geometry import Alliance, PlanarPoint, Pose2D

ON_FIELD = -1


class Action(NamedTuple):
    """Normalized drive command: forward velocity and turn rate in [-1, 1]."""

    forward: float
    turn: float

    def validated(self) -> "Action":
        if not (math.isfinite(self.forward) and math.isfinite(self.turn)):
            raise InvalidActionError(f"non-finite action {tuple(self)}")
        return Action(min(max(float(self.forward), -1.0), 1.0), min(max(float(self.turn), -1.0), 1.0))


ZERO_ACTION = Action(0.0, 0.0)


class GoalKind(str, Enum):
    ALLIANCE_RED = "alliance_red"
    ALLIANCE_BLUE = "alliance_blue"
    NEUTRAL = "neutral"

    def mirrored(self) -> "GoalKind":
        if self is GoalKind.ALLIANCE_RED:
            return GoalKind.ALLIANCE_BLUE
        if self is GoalKind.ALLIANCE_BLUE:
            return GoalKind.ALLIANCE_RED
        return self


class Ring(NamedTuple):
    position: PlanarPoint
    holder: Optional[int]  # None while on the field, else the collecting robot's index

    @property
    def on_field(self) -> bool:
        return self.holder is None


@dataclass
class MobileGoal:
    position: PlanarPoint
    kind: GoalKind
    radius: float


@dataclass
class RobotState:
    pose: Pose2D
    alliance: Alliance
    rings_held: int = 0
    pin_steps: int = 0
    pin_timer: float = 0.0
    disqualified: bool = False
    # last applied normalized forward command; decides who is pushing whom
    last_forward: float = 0.0


@dataclass
class RewardDelta:
    ring: float = 0.0
    pin: float = 0.0
    goal: float = 0.0
    position: float = 0.0

    @property
    def total(self) -> float:
        return self.ring + self.pin + self.goal + self.position

    def __add__(self, other: "RewardDelta") -> "RewardDelta":
        return RewardDelta(
            self.ring + other.ring, self.pin + other.pin,
            self.goal + other.goal, self.position + other.position,
        )

    def as_dict(self) -> dict:
        return {"ring": self.ring, "pin": self.pin, "goal": self.goal,
                "position": self.position, "total": self.total}


@dataclass
class FieldState:
    robots: list[RobotState]
    ring_pos: np.ndarray  # (N, 2) world (x, z)
    ring_holder: np.ndarray  # (N,) int, ON_FIELD or robot index
    goals: list[MobileGoal]
    step_index: int = 0
    clock: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(
            robots=[replace(r) for r in self.robots],
            ring_pos=self.ring_pos.copy(),
            ring_holder=self.ring_holder.copy(),
            goals=[replace(g) for g in self.goals],
            step_index=self.step_index,
            clock=self.clock,
        )

    @property
    def rings(self) -> list[Ring]:
        return [
            Ring(PlanarPoint(float(x), float(z)), None if h == ON_FIELD else int(h))
            for (x, z), h in zip(self.ring_pos, self.ring_holder)
        ]

    @property
    def rings_on_field(self) -> int:
        return int(np.count_nonzero(self.ring_holder == ON_FIELD))

    @property
    def disqualified(self) -> bool:
        return any(r.disqualified for r in self.robots)

    def robot_index(self, alliance: Alliance) -> int:
        for i, r in enumerate(self.robots):
            if r.alliance is alliance:
                return i
        raise KeyError(alliance)
