from __future__ import annotations

import math

from ringbot.geometry import (
    CameraMount,
    InverseIntrinsics,
    PixelDetection,
    PlanarPoint,
    localize,
)


def localize_detections(
    detections: list[PixelDetection], inv: InverseIntrinsics, mount: CameraMount
) -> list[tuple[PlanarPoint, int]]:
    """Robot-frame floor positions, nearest first.

    Each entry pairs the position with the index of its source detection;
    equal distances keep detection order.
    """
    located = [(localize(det, inv, mount), i) for i, det in enumerate(detections)]
    located.sort(key=lambda item: (math.hypot(item[0].x, item[0].z), item[1]))
    return located
