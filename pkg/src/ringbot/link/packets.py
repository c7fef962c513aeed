"""Wire codec for brain and coprocessor packets.

Grammar (ASCII, single spaces, LF terminated)::

    B <x> <z> <heading> <game_time> <iter>\\n
    J <velocity> <rotation> <iter>\\n

Numbers are written as the shortest decimal that round-trips, with
integral values printed without a fractional part (``0`` rather than
``0.0``). ``iter`` is a non-negative base-10 integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ringbot.errors import MalformedPacketError

BRAIN_TAG = "B"
JETSON_TAG = "J"
_INTEGRAL_LIMIT = 2.0**53


@dataclass(frozen=True)
class BrainPacket:
    x: float
    z: float
    heading: float
    game_time: float
    iter: int


@dataclass(frozen=True)
class JetsonPacket:
    velocity: float
    rotation: float
    iter: int


def format_number(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot encode non-finite value {value!r}")
    if value.is_integer() and abs(value) < _INTEGRAL_LIMIT:
        return str(int(value))
    return repr(value)


def _check_iter(it) -> None:
    if isinstance(it, bool) or not isinstance(it, int) or it < 0:
        raise ValueError(f"iter must be a non-negative integer, got {it!r}")


def encode_brain(p: BrainPacket) -> str:
    _check_iter(p.iter)
    fields = (p.x, p.z, p.heading, p.game_time)
    return " ".join([BRAIN_TAG, *map(format_number, fields), str(p.iter)]) + "\n"


def encode_jetson(p: JetsonPacket) -> str:
    _check_iter(p.iter)
    for name, value in (("velocity", p.velocity), ("rotation", p.rotation)):
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"{name} {value!r} outside [-1, 1]")
    return " ".join(
        [JETSON_TAG, format_number(p.velocity), format_number(p.rotation), str(p.iter)]
    ) + "\n"


def _split(line: str, tag: str, count: int) -> list[str]:
    fields = line.split()
    if not fields or fields[0] != tag:
        raise MalformedPacketError(f"expected tag {tag!r}: {line!r}")
    if len(fields) != count + 1:
        raise MalformedPacketError(
            f"expected {count} fields after {tag!r}, got {len(fields) - 1}: {line!r}"
        )
    return fields[1:]


def _parse_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedPacketError(f"unparsable number {text!r}") from None
    if not math.isfinite(value):
        raise MalformedPacketError(f"non-finite number {text!r}")
    return value


def _parse_iter(text: str) -> int:
    if not text.isascii() or not text.isdigit():
        raise MalformedPacketError(f"bad iterator {text!r}")
    return int(text)


def decode_brain(line: str) -> BrainPacket:
    x, z, heading, t, it = _split(line, BRAIN_TAG, 5)
    return BrainPacket(
        _parse_float(x), _parse_float(z), _parse_float(heading), _parse_float(t), _parse_iter(it)
    )


def decode_jetson(line: str) -> JetsonPacket:
    vel, rot, it = _split(line, JETSON_TAG, 3)
    velocity, rotation = _parse_float(vel), _parse_float(rot)
    if not (-1.0 <= velocity <= 1.0 and -1.0 <= rotation <= 1.0):
        raise MalformedPacketError(f"action outside [-1, 1]: {line!r}")
    return JetsonPacket(velocity, rotation, _parse_iter(it))
