"""Core domain types: fixations, scanpaths, images, manifests.

Coordinates are stored in source-image pixel space. All types are frozen
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

SPLITS = ("alpha", "beta")

#: logical field -> default CSV header name
DEFAULT_CSV_COLUMNS: Mapping[str, str] = {
    "image_id": "image_id",
    "reader_id": "reader_id",
    "x": "x",
    "y": "y",
    "start_time": "start_time",
    "end_time": "end_time",
}


@dataclass(frozen=True)
class Fixation:
    """One gaze fixation: position in pixels, duration in seconds."""

    x: float
    y: float
    duration: float
    seq: int

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"fixation duration must be > 0, got {self.duration}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"fixation coordinates must be >= 0, got ({self.x}, {self.y})")
        if self.seq < 1:
            raise ValueError(f"fixation seq must be >= 1, got {self.seq}")


@dataclass(frozen=True)
class ScanPath:
    """Temporally ordered fixation sequence of one reader over one image.

    The fixation order is the recording order and is never re-sorted here.
    """

    image_id: str
    reader_id: str
    fixations: tuple[Fixation, ...]
    split: str = "alpha"

    def __post_init__(self) -> None:
        object.__setattr__(self, "fixations", tuple(self.fixations))
        if not self.fixations:
            raise ValueError("scanpath must contain at least one fixation")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        for i, fix in enumerate(self.fixations, start=1):
            if fix.seq != i:
                raise ValueError(
                    f"fixation seq values must be consecutive from 1; position {i} has seq {fix.seq}"
                )

    @property
    def key(self) -> tuple[str, str]:
        return (self.image_id, self.reader_id)


@dataclass(frozen=True)
class ImageRecord:
    """A still image on disk plus its pixel dimensions.

    Decodability of ``path`` is checked where the image is actually read,
    not at construction, so manifests used only for statistics don't need
    the files present.
    """

    image_id: str
    path: str
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class ReportTexts:
    """Dictated report sections attached to one (image, reader) pair."""

    findings: str = ""
    impression: str = ""
    diagnosis: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    """Images, scanpaths and optional dictated reports for one dataset."""

    images: tuple[ImageRecord, ...]
    scanpaths: tuple[ScanPath, ...]
    reports: Mapping[tuple[str, str], ReportTexts] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "scanpaths", tuple(self.scanpaths))
        object.__setattr__(self, "reports", dict(self.reports))
        image_ids = {img.image_id for img in self.images}
        for sp in self.scanpaths:
            if sp.image_id not in image_ids:
                raise ValueError(f"scanpath references unknown image_id {sp.image_id!r}")
        scanpath_keys = {sp.key for sp in self.scanpaths}
        for key in self.reports:
            if key not in scanpath_keys:
                raise ValueError(f"report references unknown scanpath {key!r}")

    def image_index(self) -> dict[str, ImageRecord]:
        return {img.image_id: img for img in self.images}


@dataclass(frozen=True)
class IngestConfig:
    """How to interpret a fixation CSV.

    ``columns`` maps the logical field names to the actual CSV headers.
    When ``normalized_coordinates`` is set, x/y are read as fractions of
    image width/height and converted to pixels at ingest.
    """

    columns: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_CSV_COLUMNS))
    normalized_coordinates: bool = False
    split: str = "alpha"

    def __post_init__(self) -> None:
        merged = dict(DEFAULT_CSV_COLUMNS)
        merged.update(self.columns)
        object.__setattr__(self, "columns", merged)
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")


@dataclass
class IngestReport:
    """Row accounting for one ingest run; kept + skipped_* == rows."""

    rows: int = 0
    kept: int = 0
    clamped: int = 0
    skipped_duration: int = 0
    skipped_parse: int = 0
    skipped_unknown_image: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "rows": self.rows,
            "kept": self.kept,
            "clamped": self.clamped,
            "skipped_duration": self.skipped_duration,
            "skipped_parse": self.skipped_parse,
            "skipped_unknown_image": self.skipped_unknown_image,
        }


@dataclass(frozen=True)
class DatasetStats:
    """Headline manifest statistics; readers_per_image is scanpaths/images."""

    images: int
    scanpaths: int
    reports: int
    readers_per_image: float

    def to_dict(self) -> dict[str, float | int]:
        return {
            "images": self.images,
            "scanpaths": self.scanpaths,
            "reports": self.reports,
            "readers_per_image": self.readers_per_image,
        }
