from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ringbot.errors import ConfigError


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters. Lengths in metres, times in seconds."""

    field_width: float = 3.6576
    dt: float = 1.0 / 12.0
    episode_steps: int = 1260
    game_length: float = 105.0
    ring_count: int = 72
    ring_capacity: int = 10
    robot_half_extent: float = 0.2286
    pickup_radius: float = 0.25
    pin_duration: float = 5.0
    max_forward_speed: float = 1.2
    max_turn_rate: float = math.pi
    camera_fov: float = math.radians(69.0)
    camera_range: float = 1.8288
    noise_fraction: float = 0.1
    stack_depth: int = 11
    seed: int = 0
    goal_radius: float = 0.165
    contact_tolerance: float = 0.01
    ring_spacing: float = 0.12
    ring_wall_margin: float = 0.08

    def __post_init__(self):
        positive = (
            "field_width", "dt", "game_length", "robot_half_extent", "pickup_radius",
            "pin_duration", "max_forward_speed", "max_turn_rate", "camera_fov",
            "camera_range", "goal_radius", "contact_tolerance",
        )
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if self.episode_steps < 1 or self.stack_depth < 1:
            raise ConfigError("episode_steps and stack_depth must be >= 1")
        if abs(self.dt * self.episode_steps - self.game_length) > 1e-9:
            raise ConfigError(
                f"dt*episode_steps = {self.dt * self.episode_steps} != game_length {self.game_length}"
            )
        if self.ring_count < 0 or self.ring_capacity < 0:
            raise ConfigError("ring_count and ring_capacity must be >= 0")
        if self.noise_fraction < 0:
            raise ConfigError("noise_fraction must be >= 0")
        if self.camera_fov >= 2 * math.pi:
            raise ConfigError("camera_fov must be below 2*pi")
        if 2 * self.robot_half_extent * math.sqrt(2) >= self.half_width:
            raise ConfigError("robot does not fit on its half of the field")

    @property
    def half_width(self) -> float:
        return self.field_width / 2.0

    @property
    def pin_steps(self) -> int:
        """Consecutive pinning steps that trigger disqualification."""
        return max(1, round(self.pin_duration / self.dt))

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown SimConfig keys: {sorted(unknown)}")
        data = dict(data)
        # a changed step count or dt implies the matching game length
        if "game_length" not in data and ("dt" in data or "episode_steps" in data):
            data["game_length"] = data.get("dt", cls.dt) * data.get("episode_steps", cls.episode_steps)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "SimConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read sim config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)
