"""Render a scanpath into the sampled gaze-video frames."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import PlanMismatchError
from .frameplan import FramePlan, RenderConfig
from .imaging import draw_disc, load_rgb, save_png
from .types import Fixation, ImageRecord, ScanPath


@dataclass(frozen=True)
class FrameInfo:
    """Provenance of one sampled frame."""

    index: int  # 1-based index into the virtual full video
    fixation_ordinal: int
    x: float
    y: float
    duration: float


@dataclass(frozen=True)
class FrameSet:
    """The k sampled frames plus per-frame provenance."""

    image_id: str
    reader_id: str
    fps: int
    total_frames: int
    frames: tuple[np.ndarray, ...]
    entries: tuple[FrameInfo, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.frames) != len(self.entries):
            raise ValueError("frames and entries must have equal length")

    @property
    def k(self) -> int:
        return len(self.frames)

    def manifest_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "reader_id": self.reader_id,
            "fps": self.fps,
            "k": self.k,
            "total_frames": self.total_frames,
            "frames": [
                {
                    "file": frame_filename(pos),
                    "index": entry.index,
                    "fixation_ordinal": entry.fixation_ordinal,
                    "x": entry.x,
                    "y": entry.y,
                    "duration": entry.duration,
                }
                for pos, entry in enumerate(self.entries, start=1)
            ],
        }


def frame_filename(position: int) -> str:
    return f"frame_{position:04d}.png"


def render_frame(image: ImageRecord, fixation: Fixation, config: RenderConfig) -> Image.Image:
    """Base image with a single solid dot at the fixation position."""
    base = load_rgb(image)
    arr = render_frame_array(base, fixation, config)
    return Image.fromarray(arr)


def render_frame_array(base: np.ndarray, fixation: Fixation, config: RenderConfig) -> np.ndarray:
    return draw_disc(base, fixation.x, fixation.y, config.dot_radius_px, config.dot_color)


def render_video(
    image: ImageRecord, scanpath: ScanPath, plan: FramePlan, config: RenderConfig
) -> FrameSet:
    """Render the k sampled frames for a plan produced from this scanpath."""
    if len(plan.per_fixation_frames) != len(scanpath.fixations):
        raise PlanMismatchError(
            f"plan covers {len(plan.per_fixation_frames)} fixations but scanpath "
            f"{scanpath.image_id}/{scanpath.reader_id} has {len(scanpath.fixations)}"
        )
    base = load_rgb(image)
    frames: list[np.ndarray] = []
    entries: list[FrameInfo] = []
    rendered: dict[int, np.ndarray] = {}  # fixation ordinal -> frame, reused for repeats
    for idx in plan.sampled_indices:
        ordinal = plan.fixation_ordinal(idx)
        if ordinal not in rendered:
            rendered[ordinal] = render_frame_array(base, scanpath.fixations[ordinal - 1], config)
        fix = scanpath.fixations[ordinal - 1]
        frames.append(rendered[ordinal])
        entries.append(
            FrameInfo(index=idx, fixation_ordinal=ordinal, x=fix.x, y=fix.y, duration=fix.duration)
        )
    return FrameSet(
        image_id=scanpath.image_id,
        reader_id=scanpath.reader_id,
        fps=config.fps,
        total_frames=plan.total_frames,
        frames=tuple(frames),
        entries=tuple(entries),
    )


def write_frameset(frameset: FrameSet, out_dir: str) -> str:
    """Write frame_0001.png .. frame_000k.png plus frames.json; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    for pos, frame in enumerate(frameset.frames, start=1):
        save_png(frame, os.path.join(out_dir, frame_filename(pos)))
    manifest_path = os.path.join(out_dir, "frames.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(frameset.manifest_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
