"""Coordinate-frame math shared by the simulator and the perception stack.

Frames
------
camera
    OpenCV pinhole convention: x right, y down, z along the optical axis.
robot (perception)
    Origin on the floor under the robot center, x right, y down, z forward.
    This is the camera frame with the tilt removed and the mount offset
    added, so a zero mount is the identity. The floor is ``y == 0`` and the
    up direction is ``-y``.
field / robot (planar)
    Points on the floor plane are ``(x, z)``. Headings are measured
    counterclockwise from +x towards +z. In a robot's local planar frame
    the first coordinate is lateral (positive to the right) and the second
    is forward, matching the perception frame's ``(x, z)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from ringbot.errors import ConfigError, InvalidIntrinsicsError

TWO_PI = 2.0 * math.pi
DEFAULT_HALF_FIELD_WIDTH = 1.8288
DET_EPS = 1e-9


class Alliance(str, Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def opponent(self) -> "Alliance":
        return Alliance.BLUE if self is Alliance.RED else Alliance.RED


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


class PlanarPoint(NamedTuple):
    x: float
    z: float


class Pose2D(NamedTuple):
    x: float
    z: float
    heading: float

    @property
    def position(self) -> PlanarPoint:
        return PlanarPoint(self.x, self.z)


class PixelDetection(NamedTuple):
    u: float
    v: float
    depth: float


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class CameraMount:
    tilt: float = 0.0
    height: float = 0.0
    forward_offset: float = 0.0

    def __post_init__(self):
        if not -math.pi / 2 < self.tilt < math.pi / 2:
            raise ConfigError(f"camera tilt {self.tilt} outside (-pi/2, pi/2)")


@dataclass(frozen=True)
class InverseIntrinsics:
    """K^-1 for a zero-skew pinhole matrix, stored as a 3x3 array."""

    matrix: np.ndarray

    def apply(self, vec: Sequence[float]) -> Vec3:
        m = self.matrix
        a, b, c = vec
        return Vec3(
            m[0, 0] * a + m[0, 1] * b + m[0, 2] * c,
            m[1, 0] * a + m[1, 1] * b + m[1, 2] * c,
            m[2, 0] * a + m[2, 1] * b + m[2, 2] * c,
        )


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(angle, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def invert_intrinsics(k: CameraIntrinsics) -> InverseIntrinsics:
    values = (k.fx, k.fy, k.cx, k.cy)
    if not all(math.isfinite(v) for v in values):
        raise InvalidIntrinsicsError(f"non-finite intrinsics {values}")
    if k.fx <= 0 or k.fy <= 0 or abs(k.fx * k.fy) <= DET_EPS:
        raise InvalidIntrinsicsError(f"degenerate camera matrix fx={k.fx} fy={k.fy}")
    inv = np.array(
        [
            [1.0 / k.fx, 0.0, -k.cx / k.fx],
            [0.0, 1.0 / k.fy, -k.cy / k.fy],
            [0.0, 0.0, 1.0],
        ]
    )
    return InverseIntrinsics(inv)


def homogeneous_scaled(det: PixelDetection) -> Vec3:
    """The pixel with a unit third axis, multiplied by its depth."""
    return Vec3(det.u * det.depth, det.v * det.depth, det.depth)


def pixel_to_camera(det: PixelDetection, inv: InverseIntrinsics) -> Vec3:
    """Back-project a pixel with known depth into camera coordinates.

    The returned z component equals ``det.depth`` exactly because the last
    row of K^-1 is ``[0, 0, 1]``.
    """
    scaled = homogeneous_scaled(det)
    cam = inv.apply(scaled)
    return Vec3(cam.x, cam.y, scaled.z)


def rotate_x(r: Vec3, angle: float) -> Vec3:
    c, s = math.cos(angle), math.sin(angle)
    return Vec3(r.x, c * r.y - s * r.z, s * r.y + c * r.z)


def camera_to_robot(r: Vec3, mount: CameraMount) -> Vec3:
    """Remove the camera's downward tilt and move the origin to the floor.

    With tilt ``t`` the camera's optical axis points ``t`` below horizontal,
    so rotating by ``-t`` about x levels the vector. The mount translation
    then places the camera ``height`` above the floor (``-height`` along the
    y-down axis) and ``forward_offset`` ahead of the robot center.
    """
    level = rotate_x(r, -mount.tilt)
    return Vec3(level.x, level.y - mount.height, level.z + mount.forward_offset)


def drop_up_axis(w: Vec3) -> PlanarPoint:
    return PlanarPoint(w.x, w.z)


def localize(det: PixelDetection, inv: InverseIntrinsics, mount: CameraMount) -> PlanarPoint:
    """Pixel + depth to a floor position in the robot's planar frame."""
    return drop_up_axis(camera_to_robot(pixel_to_camera(det, inv), mount))


def to_alliance_frame(p: Pose2D, alliance: Alliance) -> Pose2D:
    if alliance is Alliance.RED:
        return p
    return Pose2D(-p.x, -p.z, wrap_angle(p.heading + math.pi))


def rotate_point_180(p: PlanarPoint) -> PlanarPoint:
    return PlanarPoint(-p.x, -p.z)


def normalize_position(p: PlanarPoint, half_field_width: float) -> PlanarPoint:
    if not half_field_width > 0:
        raise ConfigError(f"half field width must be positive, got {half_field_width}")
    return PlanarPoint(p.x / half_field_width, p.z / half_field_width)


def inject_noise(values, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Add independent uniform noise in [-fraction, fraction] to each value."""
    values = np.asarray(values, dtype=float)
    if fraction < 0:
        raise ConfigError(f"noise fraction must be >= 0, got {fraction}")
    if fraction == 0:
        return values.copy()
    return values + rng.uniform(-fraction, fraction, size=values.shape)


def ring_to_robot_frame(ring: PlanarPoint, robot: Pose2D) -> PlanarPoint:
    """Express a world floor point in the robot's (lateral, forward) frame."""
    dx = ring.x - robot.x
    dz = ring.z - robot.z
    c, s = math.cos(robot.heading), math.sin(robot.heading)
    return PlanarPoint(dx * s - dz * c, dx * c + dz * s)


def robot_to_world(local: PlanarPoint, robot: Pose2D) -> PlanarPoint:
    """Inverse of :func:`ring_to_robot_frame`."""
    c, s = math.cos(robot.heading), math.sin(robot.heading)
    return PlanarPoint(
        robot.x + local.x * s + local.z * c,
        robot.z - local.x * c + local.z * s,
    )


def bearing_of(local: PlanarPoint) -> float:
    """Signed angle from the forward axis; positive means turn left (CCW)."""
    return math.atan2(-local.x, local.z)


def load_calibration(path) -> tuple[CameraIntrinsics, CameraMount]:
    """Read intrinsics and mount from a calibration JSON file."""
    try:
        data = json.loads(Path(path).read_text())
        k = CameraIntrinsics(
            fx=float(data["fx"]), fy=float(data["fy"]),
            cx=float(data["cx"]), cy=float(data["cy"]),
        )
        mount = CameraMount(
            tilt=float(data.get("tilt_rad", 0.0)),
            height=float(data.get("height_m", 0.0)),
            forward_offset=float(data.get("forward_offset_m", 0.0)),
        )
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read calibration {path}: {exc}") from exc
    invert_intrinsics(k)
    return k, mount


def dump_calibration(k: CameraIntrinsics, mount: CameraMount) -> dict:
    return {
        "fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy,
        "tilt_rad": mount.tilt, "height_m": mount.height,
        "forward_offset_m": mount.forward_offset,
    }
