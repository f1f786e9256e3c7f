"""Expand a scanpath into a virtual gaze video and sample a fixed frame count.

Each fixation contributes frames proportional to its duration
(``max(1, round_half_up(duration * fps))``), then ``k`` frames are sampled
uniformly from the virtual video so temporal order and duration weighting
survive the reduction to a fixed frame budget.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Mapping

from .types import ScanPath


@dataclass(frozen=True)
class RenderConfig:
    """Knobs shared by the gaze renderers."""

    fps: int = 10
    k: int = 16
    dot_radius_px: int = 5
    dot_color: tuple[int, int, int] = (255, 0, 0)
    heatmap_alpha_min: float = 0.25

    def __post_init__(self) -> None:
        object.__setattr__(self, "dot_color", tuple(self.dot_color))
        if self.fps < 1:
            raise ValueError(f"fps must be >= 1, got {self.fps}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.dot_radius_px < 1:
            raise ValueError(f"dot_radius_px must be >= 1, got {self.dot_radius_px}")
        if not 0 < self.heatmap_alpha_min <= 1:
            raise ValueError(f"heatmap_alpha_min must be in (0, 1], got {self.heatmap_alpha_min}")
        if len(self.dot_color) != 3 or any(not 0 <= c <= 255 for c in self.dot_color):
            raise ValueError(f"dot_color must be an RGB triple in 0..255, got {self.dot_color!r}")


@dataclass(frozen=True)
class FramePlan:
    """Per-fixation frame counts and the sampled virtual-frame indices.

    ``sampled_indices`` are 1-based indices into the virtual full video,
    non-decreasing and exactly ``k`` long. ``source_fixation_of_frame``
    maps each sampled virtual index to the 1-based fixation ordinal that
    owns it.
    """

    per_fixation_frames: tuple[int, ...]
    total_frames: int
    sampled_indices: tuple[int, ...]
    source_fixation_of_frame: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_fixation_frames", tuple(self.per_fixation_frames))
        object.__setattr__(self, "sampled_indices", tuple(self.sampled_indices))
        object.__setattr__(self, "source_fixation_of_frame", dict(self.source_fixation_of_frame))
        if self.total_frames != sum(self.per_fixation_frames):
            raise ValueError("total_frames must equal the sum of per_fixation_frames")
        if any(idx < 1 or idx > self.total_frames for idx in self.sampled_indices):
            raise ValueError("sampled indices must lie in [1, total_frames]")
        if list(self.sampled_indices) != sorted(self.sampled_indices):
            raise ValueError("sampled indices must be non-decreasing")

    @property
    def k(self) -> int:
        return len(self.sampled_indices)

    def fixation_ordinal(self, virtual_index: int) -> int:
        return self.source_fixation_of_frame[virtual_index]


def frames_for_duration(duration: float, fps: int) -> int:
    """Frame count for one fixation: round half up, floor of one frame.

    The floor guarantees every fixation appears in the virtual video even
    when duration * fps rounds to zero.
    """
    return max(1, math.floor(duration * fps + 0.5))


def sampled_index(j: int, total_frames: int, k: int) -> int:
    """1-based virtual index of sample j in 1..k: clamp(floor(j*total/k), 1, total)."""
    return min(max(j * total_frames // k, 1), total_frames)


def plan_frames(scanpath: ScanPath, config: RenderConfig) -> FramePlan:
    """Expand fixations to frame counts and pick the k sampled indices."""
    per_fixation = [frames_for_duration(f.duration, config.fps) for f in scanpath.fixations]
    total = sum(per_fixation)
    cumulative = list(accumulate(per_fixation))
    indices = [sampled_index(j, total, config.k) for j in range(1, config.k + 1)]
    # virtual frame m belongs to the fixation whose cumulative range contains m
    ownership = {m: bisect_left(cumulative, m) + 1 for m in set(indices)}
    return FramePlan(
        per_fixation_frames=tuple(per_fixation),
        total_frames=total,
        sampled_indices=tuple(indices),
        source_fixation_of_frame=ownership,
    )
