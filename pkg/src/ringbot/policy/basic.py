from __future__ import annotations

import numpy as np

from ringbot.sim.state import Action


class ZeroPolicy:
    """Never moves."""

    needs_observation = False

    def act(self, stack, state, robot) -> Action:
        return Action(0.0, 0.0)


class RandomPolicy:
    """Uniform random commands from its own seeded generator."""

    needs_observation = False

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def act(self, stack, state, robot) -> Action:
        forward, turn = self.rng.uniform(-1.0, 1.0, size=2)
        return Action(float(forward), float(turn))
