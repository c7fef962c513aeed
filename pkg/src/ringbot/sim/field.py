"""Field layout, kinematic stepping, pinning, and end-of-game scoring.

Red's home is on the ``x < 0`` half and blue's on ``x > 0``; the field
center is the origin. Blue entities are always the 180-degree rotation of
red ones at layout time.
"""

from __future__ import annotations

import math
from dataclasses import replace
from enum import Enum
from typing import Sequence

import numpy as np

from ringbot.errors import ConfigError, RingbotError
from ringbot.geometry import Alliance, PlanarPoint, Pose2D, wrap_angle
from ringbot.sim import collision
from ringbot.sim.config import SimConfig
from ringbot.sim.state import (
    ON_FIELD,
    Action,
    FieldState,
    GoalKind,
    MobileGoal,
    RewardDelta,
    RobotState,
)

RING_REWARD = 5.0
PIN_PENALTY = -5.0
GOAL_REWARD = 12.0
POSITION_PENALTY = -17.5

# fixed layout seed for Layout.STANDARD
STANDARD_SEED = 20220101

HOME_INSET = 0.48
GOAL_SPOTS = {
    GoalKind.ALLIANCE_RED: (-0.9, -0.95),
    GoalKind.NEUTRAL: (0.0, 0.0),
}
_SEPARATION_ITERS = 8
_OVERLAP_EPS = 1e-9


class Layout(str, Enum):
    STANDARD = "standard"
    SEEDED_RANDOM = "seeded_random"


def home_pose(alliance: Alliance, cfg: SimConfig) -> Pose2D:
    red = Pose2D(-cfg.half_width + HOME_INSET, 0.0, 0.0)
    if alliance is Alliance.RED:
        return red
    return Pose2D(-red.x, -red.z, wrap_angle(red.heading + math.pi))


def _initial_goals(cfg: SimConfig) -> list[MobileGoal]:
    rx, rz = GOAL_SPOTS[GoalKind.ALLIANCE_RED]
    nx, nz = GOAL_SPOTS[GoalKind.NEUTRAL]
    return [
        MobileGoal(PlanarPoint(rx, rz), GoalKind.ALLIANCE_RED, cfg.goal_radius),
        MobileGoal(PlanarPoint(-rx, -rz), GoalKind.ALLIANCE_BLUE, cfg.goal_radius),
        MobileGoal(PlanarPoint(nx, nz), GoalKind.NEUTRAL, cfg.goal_radius),
    ]


def _scatter_rings(cfg: SimConfig, goals, homes, rng: np.random.Generator) -> np.ndarray:
    """Mirrored rejection sampling: each accepted point p also places -p."""
    if cfg.ring_count % 2:
        raise ConfigError("ring_count must be even for a mirrored layout")
    pairs = cfg.ring_count // 2
    lim = cfg.half_width - cfg.ring_wall_margin
    home_clear = cfg.robot_half_extent * math.sqrt(2) + 0.12
    spacing2 = cfg.ring_spacing**2
    placed: list[tuple[float, float]] = []
    attempts = 0
    max_attempts = 500 * max(pairs, 1)
    while len(placed) < 2 * pairs:
        attempts += 1
        if attempts > max_attempts:
            raise ConfigError(
                f"could not place {cfg.ring_count} rings with spacing {cfg.ring_spacing} m"
            )
        x, z = rng.uniform(-lim, lim, size=2)
        if 4 * (x * x + z * z) < spacing2:
            continue
        if any(math.hypot(x - g.position.x, z - g.position.z) < g.radius + cfg.ring_spacing
               for g in goals):
            continue
        if any(math.hypot(x - h.x, z - h.z) < home_clear for h in homes):
            continue
        if any((x - px) ** 2 + (z - pz) ** 2 < spacing2 for px, pz in placed):
            continue
        placed.append((x, z))
        placed.append((-x, -z))
    return np.array(placed, dtype=float).reshape(-1, 2)


def init_field(cfg: SimConfig, layout: Layout = Layout.SEEDED_RANDOM) -> FieldState:
    homes = [home_pose(Alliance.RED, cfg), home_pose(Alliance.BLUE, cfg)]
    goals = _initial_goals(cfg)
    seed = STANDARD_SEED if Layout(layout) is Layout.STANDARD else cfg.seed
    rng = np.random.default_rng([seed, 0])
    ring_pos = _scatter_rings(cfg, goals, homes, rng)
    return FieldState(
        robots=[RobotState(homes[0], Alliance.RED), RobotState(homes[1], Alliance.BLUE)],
        ring_pos=ring_pos,
        ring_holder=np.full(len(ring_pos), ON_FIELD, dtype=np.int64),
        goals=goals,
    )


def mirror_state(state: FieldState) -> FieldState:
    """Rotate every entity 180 degrees about the center and swap alliances."""
    out = state.copy()
    for robot in out.robots:
        p = robot.pose
        robot.pose = Pose2D(-p.x, -p.z, wrap_angle(p.heading + math.pi))
        robot.alliance = robot.alliance.opponent
    out.ring_pos = -out.ring_pos
    for goal in out.goals:
        goal.position = PlanarPoint(-goal.position.x, -goal.position.z)
        goal.kind = goal.kind.mirrored()
    return out


def is_terminal(state: FieldState, cfg: SimConfig) -> bool:
    return state.step_index >= cfg.episode_steps or state.disqualified


def _integrate(pose: Pose2D, action: Action, cfg: SimConfig) -> Pose2D:
    v = action.forward * cfg.max_forward_speed
    w = action.turn * cfg.max_turn_rate
    if v == 0.0 and w == 0.0:
        return pose
    x = pose.x + v * cfg.dt * math.cos(pose.heading)
    z = pose.z + v * cfg.dt * math.sin(pose.heading)
    return Pose2D(x, z, wrap_angle(pose.heading + w * cfg.dt))


def _separate_robots(a: Pose2D, b: Pose2D, cfg: SimConfig) -> tuple[Pose2D, Pose2D, bool]:
    """Push two overlapping robots apart, keeping both inside the walls."""
    e, hw = cfg.robot_half_extent, cfg.half_width
    share_a = share_b = 0.5
    for _ in range(_SEPARATION_ITERS):
        depth, (nx, nz) = collision.box_penetration(a, b, e)
        if depth <= 0:
            return a, b, True
        push = depth + 1e-12
        na = Pose2D(a.x - nx * push * share_a, a.z - nz * push * share_a, a.heading)
        nb = Pose2D(b.x + nx * push * share_b, b.z + nz * push * share_b, b.heading)
        ca, cb = collision.clamp_to_walls(na, e, hw), collision.clamp_to_walls(nb, e, hw)
        # a robot held by a wall cannot give way, so its partner takes the whole push
        share_a, share_b = (1.0, 0.0) if cb != nb else (0.0, 1.0) if ca != na else (0.5, 0.5)
        a, b = ca, cb
    depth, _ = collision.box_penetration(a, b, e)
    return a, b, depth <= _OVERLAP_EPS


def _push_goals(state: FieldState, cfg: SimConfig) -> None:
    for goal in state.goals:
        for robot in state.robots:
            push = collision.disc_box_push(goal.position, goal.radius, robot.pose, cfg.robot_half_extent)
            if push is None:
                continue
            lim = cfg.half_width - goal.radius
            x = min(max(goal.position.x + push[0], -lim), lim)
            z = min(max(goal.position.z + push[1], -lim), lim)
            goal.position = PlanarPoint(x, z)


def _collect_rings(state: FieldState, prev: Sequence[Pose2D], cfg: SimConfig) -> list[int]:
    """Award OnField rings swept within pickup range; returns counts per robot."""
    counts = [0] * len(state.robots)
    on = np.flatnonzero(state.ring_holder == ON_FIELD)
    if on.size == 0:
        return counts
    pts = state.ring_pos[on]
    dists = []
    for robot, before in zip(state.robots, prev):
        if robot.disqualified or robot.rings_held >= cfg.ring_capacity:
            dists.append(np.full(on.size, np.inf))
            continue
        dists.append(collision.point_segment_distance(
            pts, (before.x, before.z), (robot.pose.x, robot.pose.z)))
    dist = np.stack(dists)
    reachable = np.flatnonzero((dist <= cfg.pickup_radius).any(axis=0))
    if reachable.size == 0:
        return counts
    order = sorted(reachable, key=lambda j: (dist[:, j].min(), on[j]))
    for j in order:
        for i in sorted(range(len(state.robots)), key=lambda i: (dist[i, j], i)):
            robot = state.robots[i]
            if dist[i, j] <= cfg.pickup_radius and robot.rings_held < cfg.ring_capacity:
                robot.rings_held += 1
                state.ring_holder[on[j]] = i
                counts[i] += 1
                break
    return counts


def _in_contact(a: Pose2D, b: Pose2D, cfg: SimConfig) -> bool:
    depth, _ = collision.box_penetration(a, b, cfg.robot_half_extent)
    return depth >= -cfg.contact_tolerance


def _touches_wall(p: Pose2D, cfg: SimConfig) -> bool:
    return collision.wall_gap(p, cfg.robot_half_extent, cfg.half_width) <= cfg.contact_tolerance


def _driving_into(pusher: RobotState, target: Pose2D) -> bool:
    p = pusher.pose
    ahead = (target.x - p.x) * math.cos(p.heading) + (target.z - p.z) * math.sin(p.heading)
    return pusher.last_forward * ahead > 0


def update_pinning(state: FieldState, cfg: SimConfig) -> tuple[FieldState, list[RewardDelta]]:
    """Advance pin timers; a pin held for the full duration disqualifies the pinner.

    Robot A pins robot B while the two are in contact, B touches a wall, and
    A's last drive command moves it towards B.
    """
    out = state.copy()
    deltas = [RewardDelta() for _ in out.robots]
    a, b = out.robots
    for pinner, target, delta in ((a, b, deltas[0]), (b, a, deltas[1])):
        pinning = (
            not pinner.disqualified
            and _in_contact(pinner.pose, target.pose, cfg)
            and _touches_wall(target.pose, cfg)
            and _driving_into(pinner, target.pose)
        )
        pinner.pin_steps = pinner.pin_steps + 1 if pinning else 0
        pinner.pin_timer = min(pinner.pin_steps * cfg.dt, cfg.pin_duration)
        if pinner.pin_steps >= cfg.pin_steps:
            pinner.disqualified = True
            delta.pin += PIN_PENALTY
    return out, deltas


def step(state: FieldState, actions: Sequence[Action], cfg: SimConfig) -> tuple[FieldState, list[RewardDelta]]:
    if is_terminal(state, cfg):
        raise RingbotError("cannot step a terminal state")
    if len(actions) != len(state.robots):
        raise ValueError(f"expected {len(state.robots)} actions, got {len(actions)}")
    actions = [Action(*a).validated() for a in actions]
    out = state.copy()
    e, hw = cfg.robot_half_extent, cfg.half_width
    prev = [r.pose for r in out.robots]

    for robot, act in zip(out.robots, actions):
        robot.last_forward = act.forward
        robot.pose = collision.clamp_to_walls(_integrate(robot.pose, act, cfg), e, hw)

    ra, rb = out.robots
    pa, pb, ok = _separate_robots(ra.pose, rb.pose, cfg)
    if ok:
        ra.pose, rb.pose = pa, pb
    else:
        # unresolvable jam: neither robot moves this step
        ra.pose, rb.pose = prev

    _push_goals(out, cfg)
    counts = _collect_rings(out, prev, cfg)

    out.step_index += 1
    out.clock = out.step_index * cfg.dt
    out, deltas = update_pinning(out, cfg)
    for delta, n in zip(deltas, counts):
        delta.ring += RING_REWARD * n
    return out, deltas


def _half_sign(alliance: Alliance) -> float:
    return -1.0 if alliance is Alliance.RED else 1.0


def on_half(x: float, alliance: Alliance) -> bool:
    """Strictly inside the alliance's half; the midline belongs to neither."""
    return x * _half_sign(alliance) > 0


def finalize_episode(state: FieldState, cfg: SimConfig) -> list[RewardDelta]:
    if not is_terminal(state, cfg):
        raise RingbotError("finalize_episode called before the episode ended")
    deltas = []
    for robot in state.robots:
        scored = sum(on_half(g.position.x, robot.alliance) for g in state.goals)
        penalty = POSITION_PENALTY if on_half(robot.pose.x, robot.alliance.opponent) else 0.0
        deltas.append(RewardDelta(goal=GOAL_REWARD * scored, position=penalty))
    return deltas


def with_robot(state: FieldState, index: int, **changes) -> FieldState:
    """Copy of ``state`` with fields of one robot replaced."""
    out = state.copy()
    out.robots[index] = replace(out.robots[index], **changes)
    return out
