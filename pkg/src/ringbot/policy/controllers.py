from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ringbot.geometry import PlanarPoint, Pose2D, bearing_of, ring_to_robot_frame
from ringbot.sim.observation import ring_slots
from ringbot.sim.state import Action


@dataclass(frozen=True)
class Gains:
    turn_gain: float = 2.0
    scan_rate: float = 0.5


DEFAULT_GAINS = Gains()


def _clamp(x: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return min(max(x, lo), hi)


def steer(bearing: float, gains: Gains = DEFAULT_GAINS) -> Action:
    """Turn proportionally to the bearing error and slow down while misaligned."""
    turn = _clamp(gains.turn_gain * bearing)
    forward = _clamp(1.0 - abs(bearing) / (math.pi / 2), 0.0, 1.0)
    return Action(forward, turn)


def greedy_policy(obs: Sequence[float], gains: Gains = DEFAULT_GAINS) -> Action:
    """Drive at the nearest visible ring, or spin in place to look for one."""
    for lateral, forward in ring_slots(obs):
        if lateral != 0.0 or forward != 0.0:
            return steer(bearing_of(PlanarPoint(lateral, forward)), gains)
    return Action(0.0, gains.scan_rate)


class GreedyPolicy:
    needs_observation = True

    def __init__(self, gains: Gains = DEFAULT_GAINS):
        self.gains = gains

    def act(self, stack, state, robot) -> Action:
        return greedy_policy(stack.latest, self.gains)


def follow_path(
    path: Sequence[PlanarPoint],
    pose: Pose2D,
    lookahead: float = 0.3,
    tolerance: float = 0.05,
    gains: Gains = DEFAULT_GAINS,
) -> Action:
    """Chase the first waypoint past the lookahead distance."""
    if not path:
        raise ValueError("empty path")
    here = (pose.x, pose.z)
    if math.dist(here, path[-1]) <= tolerance:
        return Action(0.0, 0.0)
    dists = np.array([math.dist(here, p) for p in path])
    start = int(np.argmin(dists))
    target = path[-1]
    for p, d in zip(path[start:], dists[start:]):
        if d > lookahead:
            target = p
            break
    return steer(bearing_of(ring_to_robot_frame(PlanarPoint(*target), pose)), gains)
