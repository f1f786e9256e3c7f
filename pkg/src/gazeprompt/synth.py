"""Synthetic scanpath and manifest generation for tests and dry runs."""

from __future__ import annotations

import os
import random

import numpy as np

from .imaging import save_png
from .types import DatasetManifest, Fixation, ImageRecord, ScanPath


def generate_synthetic_scanpaths(
    seed: int,
    n_paths: int,
    fixation_count_range: tuple[int, int],
    duration_range_s: tuple[float, float],
    image: ImageRecord,
    split: str = "alpha",
    reader_prefix: str = "reader",
) -> list[ScanPath]:
    """Deterministic random scanpaths over one image.

    Coordinates are uniform over the image rectangle, fixation counts
    uniform over the inclusive count range, durations uniform over the
    duration range. Identical arguments produce identical output.
    """
    lo_n, hi_n = fixation_count_range
    lo_d, hi_d = duration_range_s
    if lo_n < 1 or lo_n > hi_n:
        raise ValueError(f"invalid fixation_count_range {fixation_count_range!r}")
    if lo_d <= 0 or lo_d > hi_d:
        raise ValueError(f"invalid duration_range_s {duration_range_s!r}")
    if n_paths < 0:
        raise ValueError(f"n_paths must be >= 0, got {n_paths}")
    rng = random.Random(seed)
    paths = []
    for p in range(n_paths):
        count = rng.randint(lo_n, hi_n)
        fixations = tuple(
            Fixation(
                x=rng.uniform(0.0, image.width - 1.0),
                y=rng.uniform(0.0, image.height - 1.0),
                duration=rng.uniform(lo_d, hi_d),
                seq=seq,
            )
            for seq in range(1, count + 1)
        )
        paths.append(
            ScanPath(
                image_id=image.image_id,
                reader_id=f"{reader_prefix}_{p:04d}",
                fixations=fixations,
                split=split,
            )
        )
    return paths


def make_test_image(path: str, width: int, height: int, seed: int = 0) -> ImageRecord:
    """Write a deterministic gradient-with-noise PNG usable as a fake radiograph."""
    rng = np.random.default_rng(seed)
    xs = np.linspace(0, 200, width, dtype=np.float64)
    ys = np.linspace(0, 200, height, dtype=np.float64)
    gradient = (ys[:, None] + xs[None, :]) / 2.0
    noise = rng.integers(0, 40, size=(height, width))
    gray = np.clip(gradient + noise, 0, 255).astype(np.uint8)
    arr = np.stack([gray, gray, gray], axis=-1)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    save_png(arr, path)
    image_id = os.path.splitext(os.path.basename(path))[0]
    return ImageRecord(image_id=image_id, path=path, width=width, height=height)


def synthesize_manifest(
    seed: int,
    n_images: int,
    n_scanpaths: int,
    width: int = 128,
    height: int = 128,
    fixation_count_range: tuple[int, int] = (2, 8),
    duration_range_s: tuple[float, float] = (0.1, 1.5),
    split: str = "alpha",
    image_dir: str | None = None,
) -> DatasetManifest:
    """Build a manifest with ``n_scanpaths`` spread round-robin over ``n_images``.

    When ``image_dir`` is given, real PNG files are written there; otherwise
    the records carry placeholder paths and suit geometry-only use (plans,
    statistics, fixation text).
    """
    if n_images < 1:
        raise ValueError(f"n_images must be >= 1, got {n_images}")
    if n_scanpaths < 0:
        raise ValueError(f"n_scanpaths must be >= 0, got {n_scanpaths}")
    images = []
    for i in range(n_images):
        image_id = f"img_{i:05d}"
        if image_dir is not None:
            images.append(
                make_test_image(os.path.join(image_dir, f"{image_id}.png"), width, height, seed=i)
            )
        else:
            images.append(
                ImageRecord(image_id=image_id, path=f"{image_id}.png", width=width, height=height)
            )
    rng = random.Random(seed)
    scanpaths = []
    readers_per_image: dict[str, int] = {}
    for s in range(n_scanpaths):
        image = images[s % n_images]
        reader_no = readers_per_image.get(image.image_id, 0)
        readers_per_image[image.image_id] = reader_no + 1
        count = rng.randint(*fixation_count_range)
        fixations = tuple(
            Fixation(
                x=rng.uniform(0.0, image.width - 1.0),
                y=rng.uniform(0.0, image.height - 1.0),
                duration=rng.uniform(*duration_range_s),
                seq=seq,
            )
            for seq in range(1, count + 1)
        )
        scanpaths.append(
            ScanPath(
                image_id=image.image_id,
                reader_id=f"reader_{reader_no:04d}",
                fixations=fixations,
                split=split,
            )
        )
    return DatasetManifest(images=tuple(images), scanpaths=tuple(scanpaths))
