"""Raster primitives: image loading, hard-edged disc drawing, PNG encoding.

Discs are drawn without anti-aliasing (a pixel is inside iff its grid
coordinate lies within the radius of the centre) so outputs are bit-exact
and testable.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image

from .errors import ImageDecodeError
from .types import ImageRecord


def load_rgb(record: ImageRecord) -> np.ndarray:
    """Load the image as an HxWx3 uint8 array, verifying the declared size."""
    try:
        with Image.open(record.path) as img:
            arr = np.asarray(img.convert("RGB"))
    except (OSError, ValueError, SyntaxError) as exc:
        raise ImageDecodeError(record.path, exc) from exc
    if arr.shape[:2] != (record.height, record.width):
        raise ImageDecodeError(
            record.path,
            ValueError(
                f"declared {record.width}x{record.height} but file is "
                f"{arr.shape[1]}x{arr.shape[0]}"
            ),
        )
    return arr


def disc_mask(
    shape: tuple[int, int], x: float, y: float, radius: float
) -> tuple[slice, slice, np.ndarray] | None:
    """In-bounds bounding box and boolean mask of the disc, or None if fully outside."""
    height, width = shape
    x0 = max(0, math.ceil(x - radius))
    x1 = min(width - 1, math.floor(x + radius))
    y0 = max(0, math.ceil(y - radius))
    y1 = min(height - 1, math.floor(y + radius))
    if x0 > x1 or y0 > y1:
        return None
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    mask = (xx - x) ** 2 + (yy - y) ** 2 <= radius**2
    return slice(y0, y1 + 1), slice(x0, x1 + 1), mask


def draw_disc(
    base: np.ndarray, x: float, y: float, radius: float, color: tuple[int, int, int]
) -> np.ndarray:
    """Copy of ``base`` with a solid disc at (x, y); border discs are clipped."""
    out = base.copy()
    located = disc_mask(base.shape[:2], x, y, radius)
    if located is None:
        return out
    rows, cols, mask = located
    out[rows, cols][mask] = np.array(color, dtype=np.uint8)
    return out


def blend_disc(
    canvas: np.ndarray,
    x: float,
    y: float,
    radius: float,
    color: tuple[int, int, int],
    alpha: float,
) -> np.ndarray:
    """Alpha-composite a disc over a float64 canvas (no quantisation)."""
    out = canvas.copy()
    located = disc_mask(canvas.shape[:2], x, y, radius)
    if located is None:
        return out
    rows, cols, mask = located
    patch = out[rows, cols]
    patch[mask] = alpha * np.array(color, dtype=np.float64) + (1.0 - alpha) * patch[mask]
    return out


def encode_png(arr: np.ndarray) -> bytes:
    """Deterministic PNG bytes for an HxWx3 uint8 array."""
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def save_png(arr: np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(arr))
