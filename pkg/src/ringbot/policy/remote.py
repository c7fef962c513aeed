"""Run a policy on the far side of the link.

The brain packet only carries the robot pose and game time, so the
observation stack the remote policy needs travels out of band through an
``ObservationFeed`` keyed by the brain iterator of the packet it belongs to.
In a real deployment the Jetson builds the stack from its own camera; here
the simulator plays that role.
"""

from __future__ import annotations

import copy
import threading
from typing import Callable, Optional

from ringbot.errors import PolicyError
from ringbot.geometry import to_alliance_frame
from ringbot.link.endpoints import DEFAULT_TIMEOUT, BrainEndpoint, Mode
from ringbot.link.packets import BrainPacket, JetsonPacket
from ringbot.link.transports import Transport
from ringbot.sim.state import Action


class ObservationFeed:
    """Thread-safe hand-off of ``(stack, state, robot)`` by brain iterator."""

    def __init__(self):
        self._lock = threading.Lock()
        self._items: dict[int, tuple] = {}

    def put(self, it: int, item: tuple) -> None:
        with self._lock:
            self._items[it] = item

    def take(self, it: int) -> tuple:
        with self._lock:
            # older entries can never be asked for again
            for stale in [k for k in self._items if k < it]:
                del self._items[stale]
            if it not in self._items:
                raise KeyError(f"no observation for brain packet {it}")
            return self._items.pop(it)

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


def make_jetson_handler(policy, feed: ObservationFeed) -> Callable[[BrainPacket], tuple[float, float]]:
    def handler(pkt: BrainPacket) -> tuple[float, float]:
        stack, state, robot = feed.take(pkt.iter)
        act = Action(*policy.act(stack, state, robot)).validated()
        return act.forward, act.turn

    return handler


class RemotePolicy:
    """Brain-side proxy: each ``act`` is one request/response over the link.

    ``pump`` is called after every brain step; a single-threaded harness
    passes the Jetson's ``step`` here, a threaded one leaves it None.
    """

    def __init__(
        self,
        transport: Transport,
        feed: ObservationFeed,
        needs_observation: bool = True,
        timeout: float = DEFAULT_TIMEOUT,
        max_timeouts: int = 4,
        pump: Optional[Callable[[], object]] = None,
    ):
        self.feed = feed
        self.needs_observation = needs_observation
        self.max_timeouts = max_timeouts
        self.pump = pump
        self._pose = (0.0, 0.0, 0.0, 0.0)
        self._reply: Optional[JetsonPacket] = None
        self.endpoint = BrainEndpoint(transport, lambda: self._pose, self._receive, timeout)

    def _receive(self, pkt: JetsonPacket) -> None:
        self._reply = pkt

    @property
    def state(self):
        return self.endpoint.state

    def act(self, stack, state, robot) -> Action:
        me = state.robots[robot]
        p = to_alliance_frame(me.pose, me.alliance)
        self._pose = (p.x, p.z, p.heading, state.clock)
        link = self.endpoint.state
        if link.mode is not Mode.SENDING:
            raise PolicyError(f"link is {link.mode.value}, cannot send")
        self.feed.put(link.next_iter(), (copy.deepcopy(stack), state, robot))
        self._reply = None
        self.endpoint.step()
        timeouts_before = link.timeouts
        while self._reply is None:
            if self.pump is not None:
                self.pump()
            self.endpoint.step()
            if link.timeouts - timeouts_before > self.max_timeouts:
                raise PolicyError(
                    f"no reply to brain packet {link.last_sent_iter} after {self.max_timeouts} timeouts"
                )
        return Action(self._reply.velocity, self._reply.rotation)
