from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from ringbot.errors import InvalidActionError, PolicyError
from ringbot.sim.config import SimConfig
from ringbot.sim.field import Layout, finalize_episode, init_field, is_terminal, step
from ringbot.sim.observation import StackedObservation, build_observation
from ringbot.sim.state import Action, FieldState, RewardDelta


class Policy(Protocol):
    # False lets the runner skip building observations the policy ignores
    needs_observation: bool

    def act(self, stack: StackedObservation, state: FieldState, robot: int) -> Action: ...


@dataclass
class StepRecord:
    step: int
    clock: float
    poses: list[tuple[float, float, float]]
    rings_held: list[int]
    pin_timers: list[float]
    actions: list[tuple[float, float]]
    rewards: list[RewardDelta]
    cumulative: list[float]

    def to_json(self) -> dict:
        return {
            "type": "step",
            "step": self.step,
            "clock": self.clock,
            "poses": [list(p) for p in self.poses],
            "rings_held": self.rings_held,
            "pin_timers": self.pin_timers,
            "actions": [list(a) for a in self.actions],
            "rewards": [r.as_dict() for r in self.rewards],
            "cumulative": self.cumulative,
        }


@dataclass
class EpisodeSummary:
    seed: int
    steps: int
    clock: float
    totals: list[RewardDelta]
    rings_collected: list[int]
    disqualified: list[bool]
    ended_by: str  # "time" or "pin"

    def to_json(self) -> dict:
        return {
            "type": "summary",
            "seed": self.seed,
            "steps": self.steps,
            "clock": self.clock,
            "totals": [t.as_dict() for t in self.totals],
            "rings_collected": self.rings_collected,
            "disqualified": self.disqualified,
            "ended_by": self.ended_by,
        }


@dataclass
class EpisodeLog:
    records: list[StepRecord] = field(default_factory=list)
    summary: Optional[EpisodeSummary] = None
    final_state: Optional[FieldState] = None

    def jsonl_lines(self):
        for rec in self.records:
            yield json.dumps(rec.to_json())
        if self.summary is not None:
            yield json.dumps(self.summary.to_json())

    def metrics_rows(self):
        """Per-step metrics: step, clock, cumulative reward and rings held per robot."""
        for rec in self.records:
            yield [rec.step, rec.clock, *rec.cumulative, *rec.rings_held]


def run_episode(
    cfg: SimConfig,
    policy_red: Policy,
    policy_blue: Policy,
    layout: Layout = Layout.SEEDED_RANDOM,
    record: bool = True,
    state: Optional[FieldState] = None,
) -> EpisodeLog:
    """Play one game to the clock or a disqualification.

    Robot 0 is driven by ``policy_red`` and robot 1 by ``policy_blue``. Noise
    draws come from a generator derived from ``cfg.seed``, so a seeded config
    with deterministic policies reproduces the same log.
    """
    state = init_field(cfg, layout) if state is None else state.copy()
    noise_rng = np.random.default_rng([cfg.seed, 1])
    policies = [policy_red, policy_blue]
    stacks = [StackedObservation(cfg.stack_depth) for _ in policies]
    totals = [RewardDelta() for _ in policies]
    log = EpisodeLog()

    while not is_terminal(state, cfg):
        actions = []
        for i, policy in enumerate(policies):
            if getattr(policy, "needs_observation", True):
                stacks[i].push(build_observation(state, i, cfg, noise_rng))
            try:
                act = Action(*policy.act(stacks[i], state, i)).validated()
            except InvalidActionError as exc:
                raise PolicyError(f"robot {i} returned an invalid action at step {state.step_index}: {exc}") from exc
            except PolicyError as exc:
                raise PolicyError(f"episode aborted at step {state.step_index} (robot {i}): {exc}") from exc
            except Exception as exc:
                raise PolicyError(
                    f"episode aborted at step {state.step_index}: robot {i} policy raised {exc!r}"
                ) from exc
            actions.append(act)
        state, deltas = step(state, actions, cfg)
        totals = [t + d for t, d in zip(totals, deltas)]
        if record:
            log.records.append(StepRecord(
                step=state.step_index,
                clock=state.clock,
                poses=[tuple(r.pose) for r in state.robots],
                rings_held=[r.rings_held for r in state.robots],
                pin_timers=[r.pin_timer for r in state.robots],
                actions=[tuple(a) for a in actions],
                rewards=deltas,
                cumulative=[t.total for t in totals],
            ))

    final = finalize_episode(state, cfg)
    totals = [t + d for t, d in zip(totals, final)]
    log.summary = EpisodeSummary(
        seed=cfg.seed,
        steps=state.step_index,
        clock=state.clock,
        totals=totals,
        rings_collected=[r.rings_held for r in state.robots],
        disqualified=[r.disqualified for r in state.robots],
        ended_by="pin" if state.disqualified else "time",
    )
    log.final_state = state
    return log
