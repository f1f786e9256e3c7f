"""Duration-shaded heatmap: one dot per fixation, opacity encodes duration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frameplan import RenderConfig
from .imaging import blend_disc, load_rgb
from .types import ImageRecord, ScanPath


@dataclass(frozen=True)
class HeatmapDot:
    fixation_ordinal: int
    x: float
    y: float
    duration: float
    opacity: float


@dataclass(frozen=True)
class HeatmapResult:
    image: np.ndarray
    dots: tuple[HeatmapDot, ...]

    def dots_dict(self) -> list[dict]:
        return [
            {
                "fixation_ordinal": d.fixation_ordinal,
                "x": d.x,
                "y": d.y,
                "duration": d.duration,
                "opacity": d.opacity,
            }
            for d in self.dots
        ]


def dot_opacity(duration: float, max_duration: float, alpha_min: float) -> float:
    """Linear opacity in duration with a visibility floor; the longest fixation gets 1.0."""
    return alpha_min + (1.0 - alpha_min) * (duration / max_duration)


def render_heatmap(image: ImageRecord, scanpath: ScanPath, config: RenderConfig) -> HeatmapResult:
    """Composite all fixation dots over the base image in scanpath order.

    Later fixations are drawn over earlier ones (painter's order). The
    canvas stays in float until every dot is placed so overlap blending
    does not accumulate quantisation error.
    """
    base = load_rgb(image)
    canvas = base.astype(np.float64)
    max_duration = max(f.duration for f in scanpath.fixations)
    dots: list[HeatmapDot] = []
    for fix in scanpath.fixations:
        alpha = dot_opacity(fix.duration, max_duration, config.heatmap_alpha_min)
        canvas = blend_disc(canvas, fix.x, fix.y, config.dot_radius_px, config.dot_color, alpha)
        dots.append(
            HeatmapDot(
                fixation_ordinal=fix.seq,
                x=fix.x,
                y=fix.y,
                duration=fix.duration,
                opacity=alpha,
            )
        )
    out = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
    return HeatmapResult(image=out, dots=tuple(dots))
