"""What a robot can see, and the fixed-size vector it is given.

Observation layout (27 values)::

    0-2    own x, z, heading      alliance frame; x, z / half field width, heading / pi
    3-5    opponent x, z, heading same frame and scaling
    6      elapsed fraction of the game
    7-26   10 nearest visible rings as (lateral, forward) in the robot frame,
           divided by half field width; missing rings are zero
"""

from __future__ import annotations

import math
from collections import deque
from typing import Optional

import numpy as np

from ringbot.geometry import (
    PlanarPoint,
    inject_noise,
    normalize_position,
    to_alliance_frame,
)
from ringbot.sim import collision
from ringbot.sim.config import SimConfig
from ringbot.sim.state import ON_FIELD, FieldState

OBS_SIZE = 27
MAX_RINGS = 10
RING_OFFSET = 7
TIME_INDEX = 6
# entries that receive position noise; heading and time stay clean
_POSITION_SLOTS = np.array([0, 1, 3, 4])


def visible_ring_indices(state: FieldState, robot: int, cfg: SimConfig) -> np.ndarray:
    """Indices of OnField rings the robot's camera can see, nearest first.

    A ring is visible when it lies inside the horizontal field-of-view wedge
    and camera range, and the sight line from the robot center is not
    blocked by a mobile goal disc or the opponent's body. Equal distances
    are ordered by ring index.
    """
    me = state.robots[robot].pose
    idx = np.flatnonzero(state.ring_holder == ON_FIELD)
    if idx.size == 0:
        return idx
    pts = state.ring_pos[idx]
    c, s = math.cos(me.heading), math.sin(me.heading)
    dx = pts[:, 0] - me.x
    dz = pts[:, 1] - me.z
    lateral = dx * s - dz * c
    forward = dx * c + dz * s
    dist = np.hypot(dx, dz)
    bearing = np.arctan2(-lateral, forward)
    keep = (dist <= cfg.camera_range) & (np.abs(bearing) <= cfg.camera_fov / 2)
    if not keep.any():
        return idx[:0]
    idx, pts, dist = idx[keep], pts[keep], dist[keep]
    origin = np.array([me.x, me.z])
    blocked = np.zeros(idx.size, dtype=bool)
    for goal in state.goals:
        blocked |= collision.segments_hit_disc(origin, pts, goal.position, goal.radius)
    for j, other in enumerate(state.robots):
        if j != robot:
            blocked |= collision.segments_hit_box(origin, pts, other.pose, cfg.robot_half_extent)
    idx, dist = idx[~blocked], dist[~blocked]
    return idx[np.lexsort((idx, dist))]


def visible_rings(state: FieldState, robot: int, cfg: SimConfig):
    return [state.rings[i] for i in visible_ring_indices(state, robot, cfg)]


def build_observation(
    state: FieldState,
    robot: int,
    cfg: SimConfig,
    rng: Optional[np.random.Generator] = None,
    noise_fraction: Optional[float] = None,
) -> np.ndarray:
    """The 27-value observation for ``robot``; noise needs ``rng`` when enabled."""
    frac = cfg.noise_fraction if noise_fraction is None else noise_fraction
    hw = cfg.half_width
    me = state.robots[robot]
    obs = np.zeros(OBS_SIZE)
    others = [r for j, r in enumerate(state.robots) if j != robot]
    for slot, r in enumerate([me, *others[:1]]):
        p = to_alliance_frame(r.pose, me.alliance)
        n = normalize_position(PlanarPoint(p.x, p.z), hw)
        obs[3 * slot:3 * slot + 3] = (n.x, n.z, p.heading / math.pi)
    obs[TIME_INDEX] = state.clock / cfg.game_length

    seen = visible_ring_indices(state, robot, cfg)[:MAX_RINGS]
    if seen.size:
        pose = me.pose
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        dx = state.ring_pos[seen, 0] - pose.x
        dz = state.ring_pos[seen, 1] - pose.z
        local = np.stack([dx * s - dz * c, dx * c + dz * s], axis=1) / hw
        obs[RING_OFFSET:RING_OFFSET + 2 * seen.size] = local.ravel()

    if frac > 0:
        if rng is None:
            raise ValueError("observation noise is enabled but no generator was given")
        slots = np.concatenate([_POSITION_SLOTS, RING_OFFSET + np.arange(2 * seen.size)])
        obs[slots] = inject_noise(obs[slots], frac, rng)
    return obs


def ring_slots(obs) -> np.ndarray:
    """The ring block of an observation as a (10, 2) array."""
    return np.asarray(obs)[RING_OFFSET:RING_OFFSET + 2 * MAX_RINGS].reshape(MAX_RINGS, 2)


class StackedObservation:
    """The last ``depth`` observations, oldest first, zero-initialised."""

    def __init__(self, depth: int = 11, size: int = OBS_SIZE):
        self.depth = depth
        self.size = size
        self._frames = deque((np.zeros(size) for _ in range(depth)), maxlen=depth)

    def push(self, obs) -> "StackedObservation":
        obs = np.asarray(obs, dtype=float)
        if obs.shape != (self.size,):
            raise ValueError(f"observation must have {self.size} values, got shape {obs.shape}")
        self._frames.append(obs.copy())
        return self

    @property
    def latest(self) -> np.ndarray:
        return self._frames[-1]

    @property
    def frames(self) -> list[np.ndarray]:
        return list(self._frames)

    def flatten(self) -> np.ndarray:
        return np.concatenate(self._frames)

    def __len__(self) -> int:
        return self.depth * self.size
