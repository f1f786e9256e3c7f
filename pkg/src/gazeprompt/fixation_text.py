"""Textual gaze representation: one line per fixation in relative coordinates."""

from __future__ import annotations

from .types import ImageRecord, ScanPath

ORDERINGS = ("duration_desc", "temporal")


def to_relative(value: float, size: int) -> float:
    return value / size


def to_pixels(relative: float, size: int) -> float:
    return relative * size


def render_fixation_text(
    scanpath: ScanPath, image: ImageRecord, ordering: str = "duration_desc"
) -> str:
    """List fixations as text with relative coordinates and durations.

    ``duration_desc`` sorts longest-first (ties keep temporal order);
    ``temporal`` preserves scan order. Line numbers follow the rendered
    order, so duration-sorted output carries no sequence information.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    fixations = list(scanpath.fixations)
    if ordering == "duration_desc":
        fixations.sort(key=lambda f: -f.duration)  # stable: equal durations keep scan order
    lines = [
        "fixation {n}: x={x:.3f}, y={y:.3f}, duration={t:.2f}s".format(
            n=n,
            x=to_relative(f.x, image.width),
            y=to_relative(f.y, image.height),
            t=f.duration,
        )
        for n, f in enumerate(fixations, start=1)
    ]
    return "\n".join(lines)
