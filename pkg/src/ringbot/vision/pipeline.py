"""Purple-ring preprocessing: HSV threshold, box blur, mask, candidates.

Images are numpy arrays: colour images are ``(H, W, 3)`` uint8 RGB, masks
and blurred images are ``(H, W)`` uint8, depth maps are ``(H, W)`` float
metres with 0 marking an invalid reading.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import numpy as np
from scipy import ndimage

from ringbot.errors import ConfigError
from ringbot.geometry import PixelDetection

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class HsvRange:
    h_min: int = 123
    h_max: int = 169
    s_min: int = 39
    s_max: int = 192
    v_min: int = 76
    v_max: int = 255

    def __post_init__(self):
        for lo, hi, top in ((self.h_min, self.h_max, 180), (self.s_min, self.s_max, 255),
                            (self.v_min, self.v_max, 255)):
            if not 0 <= lo <= hi <= top:
                raise ConfigError(f"bad HSV bounds {lo}..{hi} (limit {top})")


@dataclass(frozen=True)
class PipelineConfig:
    hsv: HsvRange = field(default_factory=HsvRange)
    blur_radius: int = 17
    mask_threshold: int = 0
    min_area: int = 50
    aspect_min: float = 0.5
    aspect_max: float = 2.5
    fill_min: float = 0.2
    fill_max: float = 0.9

    def __post_init__(self):
        if self.blur_radius < 0:
            raise ConfigError("blur_radius must be >= 0")
        if not 0 <= self.mask_threshold <= 255:
            raise ConfigError("mask_threshold must be in 0..255")
        if self.min_area < 1:
            raise ConfigError("min_area must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        try:
            hsv = HsvRange(**data.pop("hsv", {}))
            return cls(hsv=hsv, **data)
        except TypeError as exc:
            raise ConfigError(f"bad pipeline config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read pipeline config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Candidate:
    left: int
    top: int
    width: int
    height: int
    u: float
    v: float
    pixel_count: int

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def fill(self) -> float:
        return self.pixel_count / (self.width * self.height)

    def crop(self, img: np.ndarray) -> np.ndarray:
        return img[self.top:self.top + self.height, self.left:self.left + self.width]


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """Hexcone RGB to HSV on 8-bit scales: H in 0..179, S and V in 0..255.

    Hue is computed in degrees, halved, and rounded half-up; 180 wraps to 0.
    """
    rgb = np.asarray(img, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    lo = rgb.min(axis=-1)
    diff = v - lo
    safe_v = np.where(v > 0, v, 1.0)
    s = np.where(v > 0, diff * 255.0 / safe_v, 0.0)
    safe = np.where(diff > 0, diff, 1.0)
    h = np.where(
        v == r,
        60.0 * (g - b) / safe,
        np.where(v == g, 120.0 + 60.0 * (b - r) / safe, 240.0 + 60.0 * (r - g) / safe),
    )
    h = np.where(diff > 0, h, 0.0)
    h = np.where(h < 0, h + 360.0, h)
    h8 = np.floor(h / 2.0 + 0.5) % 180
    s8 = np.floor(s + 0.5)
    out = np.stack([h8, s8, v], axis=-1)
    return out.astype(np.uint8)


def rgb_to_hsv_pixel(r: int, g: int, b: int) -> tuple[int, int, int]:
    h, s, v = rgb_to_hsv(np.array([[[r, g, b]]], dtype=np.uint8))[0, 0]
    return int(h), int(s), int(v)


def hsv_threshold(img: np.ndarray, rng: HsvRange) -> np.ndarray:
    hsv = rgb_to_hsv(img)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    inside = (
        (h >= rng.h_min) & (h <= rng.h_max)
        & (s >= rng.s_min) & (s <= rng.s_max)
        & (v >= rng.v_min) & (v <= rng.v_max)
    )
    return np.where(inside, 255, 0).astype(np.uint8)


def box_blur(gray: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a (2r+1)^2 window with edge replication, rounded to nearest."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    gray = np.asarray(gray)
    if radius == 0:
        return gray.astype(np.uint8, copy=True)
    k = 2 * radius + 1
    padded = np.pad(gray.astype(np.int64), radius, mode="edge")
    integral = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = gray.shape
    window = (
        integral[k:k + h, k:k + w] - integral[:h, k:k + w]
        - integral[k:k + h, :w] + integral[:h, :w]
    )
    n = k * k
    return ((window + n // 2) // n).astype(np.uint8)


def mask_image(img: np.ndarray, blurred: np.ndarray, threshold: int = 0) -> np.ndarray:
    if img.shape[:2] != blurred.shape:
        raise ValueError(f"image {img.shape[:2]} and mask {blurred.shape} differ in size")
    keep = blurred > threshold
    return np.where(keep[..., None], img, 0).astype(np.uint8)


def find_candidates(mask: np.ndarray, min_area: int = 50) -> list[Candidate]:
    """8-connected blobs of nonzero pixels, largest first."""
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    labels, count = ndimage.label(np.asarray(mask) > 0, structure=_EIGHT_CONNECTED)
    if count == 0:
        return []
    flat = labels.ravel()
    areas = np.bincount(flat, minlength=count + 1)
    rows, cols = np.indices(labels.shape)
    row_sum = np.bincount(flat, weights=rows.ravel(), minlength=count + 1)
    col_sum = np.bincount(flat, weights=cols.ravel(), minlength=count + 1)
    found = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        area = int(areas[idx])
        if sl is None or area < min_area:
            continue
        rs, cs = sl
        found.append(Candidate(
            left=cs.start, top=rs.start,
            width=cs.stop - cs.start, height=rs.stop - rs.start,
            u=col_sum[idx] / area, v=row_sum[idx] / area,
            pixel_count=area,
        ))
    found.sort(key=lambda c: (-c.pixel_count, c.top, c.left))
    return found


@dataclass(frozen=True)
class Verdict:
    accept: bool
    score: float


class DetectorInterface(Protocol):
    def evaluate(self, crop: np.ndarray, candidate: Candidate) -> Verdict: ...


@dataclass(frozen=True)
class HeuristicDetector:
    """Shape gate on the candidate's box: roughly square and partly hollow."""

    aspect_min: float = 0.5
    aspect_max: float = 2.5
    fill_min: float = 0.2
    fill_max: float = 0.9

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> "HeuristicDetector":
        return cls(cfg.aspect_min, cfg.aspect_max, cfg.fill_min, cfg.fill_max)

    def evaluate(self, crop: np.ndarray, candidate: Candidate) -> Verdict:
        aspect, fill = candidate.aspect, candidate.fill
        accept = (self.aspect_min <= aspect <= self.aspect_max
                  and self.fill_min <= fill <= self.fill_max)
        # 1 for a square box, falling to 0 at the aspect limits
        limit = self.aspect_max if aspect >= 1 else 1.0 / self.aspect_min
        squareness = max(0.0, 1.0 - abs(np.log(aspect)) / np.log(max(limit, 1.0 + 1e-9)))
        return Verdict(accept, float(squareness) if accept else 0.0)


def sample_depth(depth: np.ndarray, u: float, v: float, half: int = 1) -> Optional[float]:
    """Median of the valid readings in a (2*half+1)^2 window around (u, v)."""
    h, w = depth.shape
    col = min(max(int(np.floor(u + 0.5)), 0), w - 1)
    row = min(max(int(np.floor(v + 0.5)), 0), h - 1)
    window = depth[max(row - half, 0):row + half + 1, max(col - half, 0):col + half + 1]
    valid = window[np.isfinite(window) & (window > 0)]
    if valid.size == 0:
        return None
    return float(np.median(valid))


@dataclass
class PipelineResult:
    threshold: np.ndarray
    blurred: np.ndarray
    masked: np.ndarray
    candidates: list[Candidate]
    verdicts: list[Verdict]
    accepted: list[Candidate]
    detections: list[PixelDetection]
    # accepted candidates dropped for lack of valid depth
    dropped_no_depth: int = 0
    # index into ``accepted`` for each entry of ``detections``
    detection_sources: list[int] = field(default_factory=list)


def run_pipeline(
    img: np.ndarray,
    depth: Optional[np.ndarray],
    cfg: PipelineConfig = PipelineConfig(),
    detector: Optional[DetectorInterface] = None,
) -> PipelineResult:
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    if depth is not None and depth.shape != img.shape[:2]:
        raise ValueError(f"depth {depth.shape} does not match image {img.shape[:2]}")
    detector = detector or HeuristicDetector.from_config(cfg)

    threshold = hsv_threshold(img, cfg.hsv)
    blurred = box_blur(threshold, cfg.blur_radius)
    masked = mask_image(img, blurred, cfg.mask_threshold)
    candidates = find_candidates(hsv_threshold(masked, cfg.hsv), cfg.min_area)

    verdicts, accepted = [], []
    for cand in candidates:
        verdict = detector.evaluate(cand.crop(masked), cand)
        verdicts.append(verdict)
        if verdict.accept:
            accepted.append(cand)

    result = PipelineResult(threshold, blurred, masked, candidates, verdicts, accepted, [])
    if depth is None:
        return result
    for i, cand in enumerate(accepted):
        d = sample_depth(depth, cand.u, cand.v)
        if d is None:
            result.dropped_no_depth += 1
            continue
        result.detections.append(PixelDetection(cand.u, cand.v, d))
        result.detection_sources.append(i)
    return result


def detect_rings(
    img: np.ndarray,
    depth: np.ndarray,
    cfg: PipelineConfig = PipelineConfig(),
    detector: Optional[DetectorInterface] = None,
) -> list[PixelDetection]:
    return run_pipeline(img, depth, cfg, detector).detections
