"""Half-duplex brain and coprocessor endpoints.

The brain speaks first: it sends its pose and the game clock, then waits
for a velocity/rotation reply before sending again. The coprocessor waits
for a brain packet, runs its policy, and replies. Both sides drop any
inbound packet whose iterator is not newer than the last one processed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from ringbot.errors import MalformedPacketError
from ringbot.link.packets import (
    BrainPacket,
    JetsonPacket,
    decode_brain,
    decode_jetson,
    encode_brain,
    encode_jetson,
)
from ringbot.link.transports import Transport

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 0.25


class Mode(str, Enum):
    AWAITING = "awaiting"
    PROCESSING = "processing"
    SENDING = "sending"


_LEGAL = {
    (Mode.AWAITING, Mode.PROCESSING),
    (Mode.PROCESSING, Mode.SENDING),
    (Mode.SENDING, Mode.AWAITING),
    # error path: a failed policy call abandons the reply
    (Mode.PROCESSING, Mode.AWAITING),
}


class Inbound(str, Enum):
    FRESH = "fresh"
    DUPLICATE = "duplicate"


@dataclass
class EndpointState:
    mode: Mode
    last_seen_iter: Optional[int] = None
    last_sent_iter: Optional[int] = None
    sent: int = 0
    fresh: int = 0
    duplicates: int = 0
    malformed: int = 0
    timeouts: int = 0
    failures: int = 0
    unacknowledged: int = 0
    max_unacknowledged: int = 0

    def move(self, mode: Mode) -> None:
        if (self.mode, mode) not in _LEGAL:
            raise RuntimeError(f"illegal endpoint transition {self.mode.value} -> {mode.value}")
        self.mode = mode

    def next_iter(self) -> int:
        return 0 if self.last_sent_iter is None else self.last_sent_iter + 1

    def record_send(self, it: int) -> None:
        self.last_sent_iter = it
        self.sent += 1
        self.unacknowledged += 1
        self.max_unacknowledged = max(self.max_unacknowledged, self.unacknowledged)


def accept_inbound(state: EndpointState, it: int) -> Inbound:
    """Classify an inbound iterator; repeats and stale iterators are duplicates."""
    if state.last_seen_iter is not None and it <= state.last_seen_iter:
        state.duplicates += 1
        return Inbound.DUPLICATE
    state.last_seen_iter = it
    state.fresh += 1
    state.unacknowledged = 0
    return Inbound.FRESH


# (x, z, heading, game_time) in the alliance frame
PoseSource = Callable[[], tuple[float, float, float, float]]
MotorSink = Callable[[JetsonPacket], None]
PolicyHandler = Callable[[BrainPacket], tuple[float, float]]


def brain_endpoint_step(
    state: EndpointState,
    source: PoseSource,
    sink: MotorSink,
    transport: Transport,
    timeout: float = DEFAULT_TIMEOUT,
) -> EndpointState:
    """Advance the brain by one send or one receive attempt."""
    if state.mode is Mode.SENDING:
        x, z, heading, game_time = source()
        it = state.next_iter()
        transport.send(encode_brain(BrainPacket(x, z, heading, game_time, it)))
        state.record_send(it)
        state.move(Mode.AWAITING)
        return state

    line = transport.receive(timeout)
    if line is None:
        state.timeouts += 1
        return state
    try:
        pkt = decode_jetson(line)
    except MalformedPacketError as exc:
        state.malformed += 1
        log.debug("brain discarded line: %s", exc)
        return state
    if accept_inbound(state, pkt.iter) is Inbound.DUPLICATE:
        return state
    state.move(Mode.PROCESSING)
    sink(pkt)
    state.move(Mode.SENDING)
    return state


def jetson_endpoint_step(
    state: EndpointState,
    handler: PolicyHandler,
    transport: Transport,
    timeout: float = DEFAULT_TIMEOUT,
) -> EndpointState:
    """Wait for one brain packet and, if fresh, reply with the policy's action."""
    line = transport.receive(timeout)
    if line is None:
        state.timeouts += 1
        return state
    try:
        pkt = decode_brain(line)
    except MalformedPacketError as exc:
        state.malformed += 1
        log.debug("jetson discarded line: %s", exc)
        return state
    if accept_inbound(state, pkt.iter) is Inbound.DUPLICATE:
        return state
    state.move(Mode.PROCESSING)
    try:
        velocity, rotation = handler(pkt)
        it = state.next_iter()
        reply = encode_jetson(JetsonPacket(float(velocity), float(rotation), it))
    except Exception:
        state.failures += 1
        log.exception("policy failed for brain packet %d", pkt.iter)
        state.move(Mode.AWAITING)
        return state
    state.move(Mode.SENDING)
    transport.send(reply)
    state.record_send(it)
    state.move(Mode.AWAITING)
    return state


class BrainEndpoint:
    def __init__(self, transport: Transport, source: PoseSource, sink: MotorSink,
                 timeout: float = DEFAULT_TIMEOUT):
        self.transport = transport
        self.source = source
        self.sink = sink
        self.timeout = timeout
        self.state = EndpointState(Mode.SENDING)

    def step(self) -> EndpointState:
        return brain_endpoint_step(self.state, self.source, self.sink, self.transport, self.timeout)


class JetsonEndpoint:
    def __init__(self, transport: Transport, handler: PolicyHandler,
                 timeout: float = DEFAULT_TIMEOUT):
        self.transport = transport
        self.handler = handler
        self.timeout = timeout
        self.state = EndpointState(Mode.AWAITING)

    def step(self) -> EndpointState:
        return jetson_endpoint_step(self.state, self.handler, self.transport, self.timeout)

    def serve(self, stop) -> None:
        """Step until ``stop`` (a threading.Event) is set."""
        while not stop.is_set():
            self.step()
