"""Small embedded invariant suite runnable from the command line."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from ringbot.geometry import (
    CameraIntrinsics,
    CameraMount,
    PixelDetection,
    Pose2D,
    homogeneous_scaled,
    invert_intrinsics,
    localize,
)
from ringbot.link.packets import BrainPacket, JetsonPacket, decode_brain, decode_jetson, encode_brain, encode_jetson
from ringbot.sim import SimConfig, build_observation, init_field, mirror_state


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def check_projection_round_trip(n: int = 200, seed: int = 0) -> CheckResult:
    """Project floor points into a tilted camera and localize them back."""
    rng = np.random.default_rng(seed)
    k = CameraIntrinsics(615.0, 615.0, 320.0, 240.0)
    mount = CameraMount(tilt=0.35, height=0.3, forward_offset=0.1)
    inv = invert_intrinsics(k)
    c, s = math.cos(mount.tilt), math.sin(mount.tilt)
    worst = 0.0
    for _ in range(n):
        gx, gz = rng.uniform(-0.5, 0.5), rng.uniform(0.6, 2.0)
        # floor point relative to the camera, in camera axes (tilted down by ``tilt``)
        rx, ry, rz = gx, mount.height, gz - mount.forward_offset
        xc, yc, zc = rx, c * ry - s * rz, s * ry + c * rz
        det = PixelDetection(k.fx * xc / zc + k.cx, k.fy * yc / zc + k.cy, zc)
        p = localize(det, inv, mount)
        worst = max(worst, math.hypot(p.x - gx, p.z - gz) / math.hypot(gx, gz))
    scaled = homogeneous_scaled(PixelDetection(220.0, 380.0, 1.2))
    ok = worst < 1e-9 and tuple(scaled) == (264.0, 456.0, 1.2)
    return CheckResult("projection round trip", ok, f"max relative error {worst:.2e} over {n} points")


def check_alliance_symmetry(n: int = 50, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    cfg = SimConfig()
    worst = 0.0
    lim = cfg.half_width - cfg.robot_half_extent * math.sqrt(2)
    for i in range(n):
        state = init_field(SimConfig(seed=i))
        for robot in state.robots:
            robot.pose = Pose2D(*rng.uniform(-lim, lim, 2), rng.uniform(-math.pi, math.pi))
        mirrored = mirror_state(state)
        for r in (0, 1):
            a = build_observation(state, r, cfg, noise_fraction=0.0)
            b = build_observation(mirrored, r, cfg, noise_fraction=0.0)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return CheckResult("alliance symmetry", worst <= 1e-12, f"max deviation {worst:.2e} over {n} states")


def check_codec_round_trip(n: int = 500, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for i in range(n):
        b = BrainPacket(*map(float, rng.normal(size=3)), float(rng.uniform(0, 105)), i)
        j = JetsonPacket(*map(float, rng.uniform(-1, 1, size=2)), i)
        failures += decode_brain(encode_brain(b)) != b
        failures += decode_jetson(encode_jetson(j)) != j
    return CheckResult("codec round trip", failures == 0, f"{failures} mismatches over {2 * n} packets")


CHECKS: list[Callable[[], CheckResult]] = [
    check_projection_round_trip,
    check_alliance_symmetry,
    check_codec_round_trip,
]


def run_selfcheck() -> list[CheckResult]:
    return [check() for check in CHECKS]
