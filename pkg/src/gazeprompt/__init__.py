"""Gaze-scanpath prompt pipeline.

Converts eye-fixation scanpaths over chest X-ray images into three prompt
modalities (gaze video frames, duration-shaded heatmap, fixation text),
assembles task prompts, runs them against a chat-completions endpoint,
and scores outputs relative to a baseline model.
"""

__version__ = "0.1.0"

from .frameplan import FramePlan, RenderConfig, plan_frames
from .types import (
    DatasetManifest,
    DatasetStats,
    Fixation,
    ImageRecord,
    IngestConfig,
    IngestReport,
    ScanPath,
)

__all__ = [
    "DatasetManifest",
    "DatasetStats",
    "Fixation",
    "FramePlan",
    "ImageRecord",
    "IngestConfig",
    "IngestReport",
    "RenderConfig",
    "ScanPath",
    "plan_frames",
    "__version__",
]
