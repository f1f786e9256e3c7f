"""Dataset manifest JSON serialization and headline statistics."""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from typing import IO

from .types import (
    DatasetManifest,
    DatasetStats,
    Fixation,
    ImageRecord,
    ReportTexts,
    ScanPath,
)

MANIFEST_VERSION = 1


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "manifest_version": MANIFEST_VERSION,
        "images": [
            {"image_id": i.image_id, "path": i.path, "width": i.width, "height": i.height}
            for i in sorted(manifest.images, key=lambda i: i.image_id)
        ],
        "scanpaths": [
            {
                "image_id": sp.image_id,
                "reader_id": sp.reader_id,
                "split": sp.split,
                "fixations": [
                    {"x": f.x, "y": f.y, "duration": f.duration, "seq": f.seq}
                    for f in sp.fixations
                ],
            }
            for sp in sorted(manifest.scanpaths, key=lambda s: s.key)
        ],
        "reports": [
            {
                "image_id": image_id,
                "reader_id": reader_id,
                "findings": rep.findings,
                "impression": rep.impression,
                "diagnosis": rep.diagnosis,
            }
            for (image_id, reader_id), rep in sorted(manifest.reports.items())
        ],
    }


def manifest_from_dict(data: dict) -> DatasetManifest:
    version = data.get("manifest_version")
    if version != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest_version {version!r}, expected {MANIFEST_VERSION}")
    images = tuple(
        ImageRecord(
            image_id=i["image_id"], path=i["path"], width=int(i["width"]), height=int(i["height"])
        )
        for i in data.get("images", [])
    )
    scanpaths = tuple(
        ScanPath(
            image_id=sp["image_id"],
            reader_id=sp["reader_id"],
            split=sp.get("split", "alpha"),
            fixations=tuple(
                Fixation(
                    x=float(f["x"]), y=float(f["y"]), duration=float(f["duration"]), seq=int(f["seq"])
                )
                for f in sp["fixations"]
            ),
        )
        for sp in data.get("scanpaths", [])
    )
    reports = {
        (r["image_id"], r["reader_id"]): ReportTexts(
            findings=r.get("findings", ""),
            impression=r.get("impression", ""),
            diagnosis=r.get("diagnosis", ""),
        )
        for r in data.get("reports", [])
    }
    return DatasetManifest(images=images, scanpaths=scanpaths, reports=reports)


def dumps_manifest(manifest: DatasetManifest) -> str:
    return json.dumps(manifest_to_dict(manifest), indent=2, sort_keys=True) + "\n"


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_manifest(manifest))


def load_manifest(source: str | IO[str]) -> DatasetManifest:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.load(source)
    return manifest_from_dict(data)


def round_half_up(value: float, places: int) -> float:
    """Display rounding: ties go away from zero (repr-based, so 1.18-like results are stable)."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def summarize_manifest(manifest: DatasetManifest, split: str | None = None) -> DatasetStats:
    """Image/scanpath/report counts; readers_per_image to 2 decimals.

    ``split`` restricts the summary to scanpaths of that split (images are
    counted if referenced by an included scanpath).
    """
    split_of = {sp.key: sp.split for sp in manifest.scanpaths}
    scanpaths = [sp for sp in manifest.scanpaths if split is None or sp.split == split]
    if split is None:
        n_images = len(manifest.images)
    else:
        n_images = len({sp.image_id for sp in scanpaths})
    reports = [key for key in manifest.reports if split is None or split_of.get(key) == split]
    readers = round_half_up(len(scanpaths) / n_images, 2) if n_images else 0.0
    return DatasetStats(
        images=n_images,
        scanpaths=len(scanpaths),
        reports=len(reports),
        readers_per_image=readers,
    )
