import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringbot.errors import ConfigError, InvalidIntrinsicsError
from ringbot.geometry import (
    Alliance,
    CameraIntrinsics,
    CameraMount,
    PixelDetection,
    PlanarPoint,
    Pose2D,
    Vec3,
    camera_to_robot,
    drop_up_axis,
    homogeneous_scaled,
    inject_noise,
    invert_intrinsics,
    load_calibration,
    localize,
    normalize_position,
    pixel_to_camera,
    ring_to_robot_frame,
    robot_to_world,
    to_alliance_frame,
    wrap_angle,
)
from oracles import project_floor_point

K600 = CameraIntrinsics(600.0, 600.0, 320.0, 240.0)

finite = st.floats(-50, 50, allow_nan=False)
angles = st.floats(-10, 10, allow_nan=False)


class TestIntrinsics:
    def test_identity(self):
        inv = invert_intrinsics(CameraIntrinsics(1.0, 1.0, 0.0, 0.0))
        assert np.array_equal(inv.matrix, np.eye(3))

    def test_multiply_back(self):
        inv = invert_intrinsics(K600)
        prod = K600.matrix @ inv.matrix
        assert np.all(np.abs(prod - np.eye(3)) < 1e-12)

    @pytest.mark.parametrize("fx,fy", [(0.0, 600.0), (600.0, 0.0), (-1.0, 1.0), (1e-6, 1e-6)])
    def test_degenerate(self, fx, fy):
        with pytest.raises(InvalidIntrinsicsError):
            invert_intrinsics(CameraIntrinsics(fx, fy, 1.0, 1.0))


class TestPixelToCamera:
    def test_worked_example_intermediate(self):
        v = homogeneous_scaled(PixelDetection(220, 380, 1.2))
        assert v == (264.0, 456.0, 1.2)

    def test_worked_example_back_projection(self):
        inv = invert_intrinsics(K600)
        r = pixel_to_camera(PixelDetection(220, 380, 1.2), inv)
        assert r.z == 1.2
        assert r.x == pytest.approx((264.0 - 320.0 * 1.2) / 600.0, abs=1e-15)
        assert r.y == pytest.approx((456.0 - 240.0 * 1.2) / 600.0, abs=1e-15)

    def test_identity_intrinsics(self):
        inv = invert_intrinsics(CameraIntrinsics(1.0, 1.0, 0.0, 0.0))
        assert pixel_to_camera(PixelDetection(0, 0, 1.0), inv) == (0.0, 0.0, 1.0)

    def test_principal_point_on_axis(self):
        inv = invert_intrinsics(K600)
        assert pixel_to_camera(PixelDetection(320, 240, 2.0), inv) == (0.0, 0.0, 2.0)

    @given(st.floats(0, 640), st.floats(0, 480), st.floats(0.05, 10))
    def test_depth_preserved_exactly(self, u, v, d):
        r = pixel_to_camera(PixelDetection(u, v, d), invert_intrinsics(K600))
        assert r.z == d


class TestCameraToRobot:
    def test_zero_mount_is_identity(self):
        r = Vec3(0.3, -0.2, 1.7)
        assert camera_to_robot(r, CameraMount()) == r

    def test_quarter_turn(self):
        w = camera_to_robot(Vec3(0.0, 0.0, 1.0), CameraMount(tilt=math.pi / 2 - 1e-15))
        assert w.x == 0.0
        assert w.y == pytest.approx(1.0, abs=1e-12)
        assert w.z == pytest.approx(0.0, abs=1e-12)

    def test_tilt_out_of_range(self):
        with pytest.raises(ConfigError):
            CameraMount(tilt=math.pi / 2)

    @given(finite, finite, finite, st.floats(-1.5, 1.5))
    def test_rotation_is_isometry(self, x, y, z, tilt):
        w = camera_to_robot(Vec3(x, y, z), CameraMount(tilt=tilt))
        assert math.hypot(*w) == pytest.approx(math.hypot(x, y, z), rel=1e-12, abs=1e-12)


class TestDropUpAxis:
    def test_projection(self):
        assert drop_up_axis(Vec3(1, 5, 2)) == (1, 2)
        assert drop_up_axis(Vec3(0, 0, 0)) == (0, 0)

    def test_floor_ring_sits_camera_height_below(self):
        # With no mount translation the leveled vector is camera-centered,
        # so a floor point lies +height along the y-down axis.
        tilt, height = 0.35, 0.3
        u, v, d = project_floor_point(0.1, 1.5, 600, 600, 320, 240, tilt, height, 0.0)
        inv = invert_intrinsics(K600)
        level = camera_to_robot(pixel_to_camera(PixelDetection(u, v, d), inv), CameraMount(tilt=tilt))
        assert level.y == pytest.approx(height, abs=1e-12)
        full = camera_to_robot(
            pixel_to_camera(PixelDetection(u, v, d), inv), CameraMount(tilt=tilt, height=height)
        )
        assert full.y == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300)
@given(
    gx=st.floats(-1.0, 1.0),
    gz=st.floats(0.4, 3.0),
    tilt=st.floats(0.0, 0.6),
    height=st.floats(0.1, 0.6),
    offset=st.floats(-0.2, 0.2),
)
def test_localization_round_trip(gx, gz, tilt, height, offset):
    u, v, d = project_floor_point(gx, gz, 600, 600, 320, 240, tilt, height, offset)
    if d <= 0.05:
        return
    mount = CameraMount(tilt=tilt, height=height, forward_offset=offset)
    p = localize(PixelDetection(u, v, d), invert_intrinsics(K600), mount)
    scale = max(math.hypot(gx, gz), 1.0)
    assert abs(p.x - gx) <= 1e-9 * scale
    assert abs(p.z - gz) <= 1e-9 * scale


class TestAllianceFrame:
    def test_red_unchanged(self):
        p = Pose2D(1.0, 0.5, 0.3)
        assert to_alliance_frame(p, Alliance.RED) == p

    def test_blue_rotates(self):
        assert to_alliance_frame(Pose2D(1.0, 0.5, 0.0), Alliance.BLUE) == (-1.0, -0.5, math.pi)

    @given(finite, finite, angles)
    def test_blue_involution(self, x, z, h):
        p = Pose2D(x, z, wrap_angle(h))
        twice = to_alliance_frame(to_alliance_frame(p, Alliance.BLUE), Alliance.BLUE)
        assert twice.x == p.x and twice.z == p.z
        assert abs(wrap_angle(twice.heading - p.heading)) < 1e-12

    @given(angles)
    def test_heading_stays_wrapped(self, h):
        out = to_alliance_frame(Pose2D(0, 0, wrap_angle(h)), Alliance.BLUE).heading
        assert -math.pi < out <= math.pi


def test_wrap_angle_bounds():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.25) == 0.25


class TestNormalize:
    def test_boundary(self):
        assert normalize_position(PlanarPoint(1.8288, -1.8288), 1.8288) == (1.0, -1.0)

    def test_origin(self):
        assert normalize_position(PlanarPoint(0, 0), 1.8288) == (0.0, 0.0)

    def test_division(self):
        assert normalize_position(PlanarPoint(0.9144, 0.4572), 1.8288) == (0.5, 0.25)

    @pytest.mark.parametrize("w", [0.0, -1.0])
    def test_bad_width(self, w):
        with pytest.raises(ConfigError):
            normalize_position(PlanarPoint(1, 1), w)

    @given(finite, finite, st.floats(-4, 4))
    def test_linear(self, x, z, a):
        lhs = normalize_position(PlanarPoint(a * x, a * z), 1.8288)
        rhs = normalize_position(PlanarPoint(x, z), 1.8288)
        assert lhs.x == pytest.approx(a * rhs.x, abs=1e-12)
        assert lhs.z == pytest.approx(a * rhs.z, abs=1e-12)


class TestNoise:
    def test_zero_fraction(self):
        vals = [0.1, -0.5, 0.9]
        out = inject_noise(vals, 0.0, np.random.default_rng(0))
        assert out.tolist() == vals

    def test_deterministic(self):
        a = inject_noise(np.zeros(20), 0.1, np.random.default_rng(3))
        b = inject_noise(np.zeros(20), 0.1, np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_statistics(self):
        out = inject_noise(np.zeros(100_000), 0.1, np.random.default_rng(11))
        assert abs(out.mean()) < 0.002
        assert out.min() >= -0.1 and out.max() <= 0.1


class TestRingToRobotFrame:
    def test_identity_frame(self):
        # Facing +z the (lateral, forward) frame coincides with world (x, z).
        p = ring_to_robot_frame(PlanarPoint(2, 3), Pose2D(0, 0, math.pi / 2))
        assert p.x == pytest.approx(2.0, abs=1e-15)
        assert p.z == pytest.approx(3.0, abs=1e-15)

    def test_heading_zero_faces_plus_x(self):
        assert ring_to_robot_frame(PlanarPoint(2, 3), Pose2D(0, 0, 0)) == (-3.0, 2.0)

    def test_quarter_turn_ring_ahead(self):
        p = ring_to_robot_frame(PlanarPoint(1, 1), Pose2D(1, 0, math.pi / 2))
        assert p.x == pytest.approx(0.0, abs=1e-15)
        assert p.z == pytest.approx(1.0, abs=1e-15)

    @given(finite, finite, finite, finite, angles)
    def test_inverse(self, rx, rz, x, z, h):
        pose = Pose2D(x, z, wrap_angle(h))
        back = robot_to_world(ring_to_robot_frame(PlanarPoint(rx, rz), pose), pose)
        assert back.x == pytest.approx(rx, abs=1e-12)
        assert back.z == pytest.approx(rz, abs=1e-12)

    @given(finite, finite, finite, finite, finite, finite, angles)
    def test_rigid(self, ax, az, bx, bz, x, z, h):
        pose = Pose2D(x, z, wrap_angle(h))
        la = ring_to_robot_frame(PlanarPoint(ax, az), pose)
        lb = ring_to_robot_frame(PlanarPoint(bx, bz), pose)
        assert math.dist(la, lb) == pytest.approx(math.dist((ax, az), (bx, bz)), abs=1e-12)


def test_calibration_file(tmp_path):
    path = tmp_path / "cal.json"
    path.write_text(
        '{"fx": 600, "fy": 610, "cx": 320, "cy": 240, "tilt_rad": 0.2,'
        ' "height_m": 0.3, "forward_offset_m": 0.1}'
    )
    k, mount = load_calibration(path)
    assert k == CameraIntrinsics(600, 610, 320, 240)
    assert mount == CameraMount(0.2, 0.3, 0.1)
    path.write_text('{"fx": 0, "fy": 610, "cx": 320, "cy": 240}')
    with pytest.raises(ConfigError):
        load_calibration(path)
