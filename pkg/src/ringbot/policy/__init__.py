"""Controllers that turn observations (or, for baselines, the true state) into actions."""

from ringbot.errors import ConfigError
from ringbot.policy.basic import RandomPolicy, ZeroPolicy
from ringbot.policy.controllers import DEFAULT_GAINS, Gains, GreedyPolicy, follow_path, greedy_policy, steer
from ringbot.policy.planning import AStarPolicy, GridMap, Path, astar_cells, astar_plan, cost_less
from ringbot.policy.remote import ObservationFeed, RemotePolicy, make_jetson_handler

POLICY_NAMES = ("zero", "random", "greedy", "astar")


def make_policy(name: str, seed: int = 0, gains: Gains = DEFAULT_GAINS, cfg=None):
    if name == "zero":
        return ZeroPolicy()
    if name == "random":
        return RandomPolicy(seed)
    if name == "greedy":
        return GreedyPolicy(gains)
    if name == "astar":
        return AStarPolicy(cfg, gains=gains)
    raise ConfigError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")


__all__ = [
    "AStarPolicy", "DEFAULT_GAINS", "Gains", "GreedyPolicy", "GridMap", "ObservationFeed",
    "POLICY_NAMES", "Path", "RandomPolicy", "RemotePolicy", "ZeroPolicy", "astar_cells",
    "astar_plan", "cost_less", "follow_path", "greedy_policy", "make_jetson_handler",
    "make_policy", "steer",
]
