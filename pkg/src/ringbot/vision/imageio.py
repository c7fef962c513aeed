"""Reading and writing colour images and depth maps.

Depth formats:

- 16-bit PNG holding millimetres (0 = invalid)
- raw ``.depth``: width and height as little-endian uint32, then
  row-major little-endian float32 metres
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

_RAW_HEADER = struct.Struct("<II")


def read_color_image(path) -> np.ndarray:
    """Load a PNG or binary PPM (P6) as an (H, W, 3) uint8 RGB array."""
    with Image.open(path) as im:
        return np.array(im.convert("RGB"), dtype=np.uint8)


def write_color_image(path, img: np.ndarray) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8)).save(path)


def write_gray_image(path, img: np.ndarray) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path)


def read_depth(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".depth":
        return read_raw_depth(path)
    with Image.open(path) as im:
        mm = np.array(im)
    if mm.ndim != 2:
        raise ValueError(f"{path}: depth PNG must be single-channel")
    return mm.astype(np.float64) / 1000.0


def read_raw_depth(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _RAW_HEADER.size:
        raise ValueError(f"{path}: truncated depth header")
    width, height = _RAW_HEADER.unpack_from(data)
    body = data[_RAW_HEADER.size:]
    if len(body) != 4 * width * height:
        raise ValueError(f"{path}: expected {width}x{height} floats, got {len(body)} bytes")
    return np.frombuffer(body, dtype="<f4").reshape(height, width).astype(np.float64)


def write_raw_depth(path, depth: np.ndarray) -> None:
    depth = np.asarray(depth, dtype="<f4")
    height, width = depth.shape
    Path(path).write_bytes(_RAW_HEADER.pack(width, height) + depth.tobytes())


def write_depth_png(path, depth_m: np.ndarray) -> None:
    mm = np.clip(np.rint(np.asarray(depth_m) * 1000.0), 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(path)
