"""Deterministic 2D simulation of the ring-collection game."""

from ringbot.sim.config import SimConfig
from ringbot.sim.field import (
    Layout,
    finalize_episode,
    home_pose,
    init_field,
    is_terminal,
    mirror_state,
    step,
    update_pinning,
)
from ringbot.sim.observation import (
    OBS_SIZE,
    StackedObservation,
    build_observation,
    ring_slots,
    visible_ring_indices,
    visible_rings,
)
from ringbot.sim.runner import EpisodeLog, EpisodeSummary, Policy, run_episode
from ringbot.sim.state import (
    Action,
    FieldState,
    GoalKind,
    MobileGoal,
    RewardDelta,
    Ring,
    RobotState,
)

__all__ = [
    "SimConfig", "Layout", "finalize_episode", "home_pose", "init_field", "is_terminal",
    "mirror_state", "step", "update_pinning", "OBS_SIZE", "StackedObservation",
    "build_observation", "ring_slots", "visible_ring_indices", "visible_rings",
    "EpisodeLog", "EpisodeSummary", "Policy", "run_episode", "Action", "FieldState",
    "GoalKind", "MobileGoal", "RewardDelta", "Ring", "RobotState",
]
