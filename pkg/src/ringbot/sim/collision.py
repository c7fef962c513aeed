"""2D contact geometry: square robots, disc goals, and field walls.

A robot is a square of half-extent ``e`` centred on its pose, with one
side facing along the heading.
"""

from __future__ import annotations

import math

import numpy as np

from ringbot.geometry import PlanarPoint, Pose2D


def box_axes(heading: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Forward and right-hand unit vectors for a heading."""
    c, s = math.cos(heading), math.sin(heading)
    return (c, s), (s, -c)


def wall_extent(heading: float, half_extent: float) -> float:
    """Half-width of the square's axis-aligned bounding box."""
    return half_extent * (abs(math.cos(heading)) + abs(math.sin(heading)))


def clamp_to_walls(pose: Pose2D, half_extent: float, half_width: float) -> Pose2D:
    lim = half_width - wall_extent(pose.heading, half_extent)
    x = min(max(pose.x, -lim), lim)
    z = min(max(pose.z, -lim), lim)
    if x == pose.x and z == pose.z:
        return pose
    return Pose2D(x, z, pose.heading)


def wall_gap(pose: Pose2D, half_extent: float, half_width: float) -> float:
    """Distance from the robot's bounding box to the nearest wall (negative if through)."""
    ext = wall_extent(pose.heading, half_extent)
    return half_width - ext - max(abs(pose.x), abs(pose.z))


def box_penetration(a: Pose2D, b: Pose2D, half_extent: float) -> tuple[float, tuple[float, float]]:
    """Separating-axis test for two equal squares.

    Returns ``(depth, normal)``: positive depth is the overlap along the
    minimum-translation axis, negative depth is the gap along the best
    separating axis. ``normal`` points from ``a`` to ``b``.
    """
    fa, la = box_axes(a.heading)
    fb, lb = box_axes(b.heading)
    dx, dz = b.x - a.x, b.z - a.z
    best = math.inf
    best_n = (1.0, 0.0)
    for n in (fa, la, fb, lb):
        ra = half_extent * (abs(fa[0] * n[0] + fa[1] * n[1]) + abs(la[0] * n[0] + la[1] * n[1]))
        rb = half_extent * (abs(fb[0] * n[0] + fb[1] * n[1]) + abs(lb[0] * n[0] + lb[1] * n[1]))
        dist = dx * n[0] + dz * n[1]
        overlap = ra + rb - abs(dist)
        if overlap < best:
            best = overlap
            best_n = n if dist >= 0 else (-n[0], -n[1])
    return best, best_n


def disc_box_push(center: PlanarPoint, radius: float, box: Pose2D, half_extent: float):
    """Vector that moves a disc out of a box, or None when they do not overlap."""
    f, l = box_axes(box.heading)
    rx, rz = center.x - box.x, center.z - box.z
    along, across = rx * f[0] + rz * f[1], rx * l[0] + rz * l[1]
    ca = min(max(along, -half_extent), half_extent)
    cc = min(max(across, -half_extent), half_extent)
    ox, oz = rx - (ca * f[0] + cc * l[0]), rz - (ca * f[1] + cc * l[1])
    dist = math.hypot(ox, oz)
    if dist >= radius:
        return None
    if dist > 0:
        k = (radius - dist) / dist
        return ox * k, oz * k
    # centre inside the box: leave through the nearest face
    if half_extent - abs(along) <= half_extent - abs(across):
        sign = 1.0 if along >= 0 else -1.0
        depth = half_extent - abs(along) + radius
        return f[0] * sign * depth, f[1] * sign * depth
    sign = 1.0 if across >= 0 else -1.0
    depth = half_extent - abs(across) + radius
    return l[0] * sign * depth, l[1] * sign * depth


def segments_hit_disc(origin, ends: np.ndarray, center, radius: float) -> np.ndarray:
    """For segments origin->ends[i], whether each passes strictly inside the disc."""
    d = ends - origin
    g = np.asarray(center, dtype=float) - origin
    len2 = np.einsum("ij,ij->i", d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(len2 > 0, (d @ g) / np.where(len2 > 0, len2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = d * t[:, None]
    off = closest - g
    return np.einsum("ij,ij->i", off, off) < radius * radius


def segments_hit_box(origin, ends: np.ndarray, box: Pose2D, half_extent: float) -> np.ndarray:
    """Slab test of segments origin->ends[i] against a square box."""
    f, l = box_axes(box.heading)
    axes = np.array([f, l])
    p0 = axes @ (np.asarray(origin, dtype=float) - (box.x, box.z))
    p1 = (ends - (box.x, box.z)) @ axes.T
    d = p1 - p0
    tmin = np.zeros(len(ends))
    tmax = np.ones(len(ends))
    hit = np.ones(len(ends), dtype=bool)
    for k in range(2):
        dk = d[:, k]
        flat = np.abs(dk) < 1e-15
        hit &= ~(flat & (abs(p0[k]) > half_extent))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-half_extent - p0[k]) / dk
            t2 = (half_extent - p0[k]) / dk
        lo = np.where(flat, -np.inf, np.minimum(t1, t2))
        hi = np.where(flat, np.inf, np.maximum(t1, t2))
        tmin = np.maximum(tmin, lo)
        tmax = np.minimum(tmax, hi)
    return hit & (tmin <= tmax)


def point_segment_distance(points: np.ndarray, a, b) -> np.ndarray:
    """Distance from each point to the segment a-b."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    rel = points - a
    len2 = float(d @ d)
    if len2 == 0:
        return np.hypot(rel[:, 0], rel[:, 1])
    t = np.clip(rel @ d / len2, 0.0, 1.0)
    off = rel - t[:, None] * d
    return np.hypot(off[:, 0], off[:, 1])
