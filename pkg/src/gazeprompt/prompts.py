"""Assemble task prompts from templates, exemplars, and gaze payloads."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fixation_text import render_fixation_text
from .frameplan import RenderConfig, plan_frames
from .frames import FrameSet, render_video
from .heatmap import render_heatmap
from .imaging import load_rgb
from .types import ImageRecord, ScanPath

logger = logging.getLogger(__name__)

REPORT_MAX_TOKENS = 256
DIAGNOSIS_MAX_TOKENS = 64
DEFAULT_EXEMPLAR_COUNT = 3


class TaskKind(str, Enum):
    findings_generation = "findings_generation"
    impression_generation = "impression_generation"
    diagnosis = "diagnosis"


class GazeMode(str, Enum):
    none = "none"
    heatmap = "heatmap"
    fixation_text = "fixation_text"
    video = "video"


DEFAULT_TEMPLATES = {
    "findings_instruction": "Provide a detailed description of the findings in the radiology image.",
    "impression_instruction": "Summarize the following findings into an impression: {findings}",
    "diagnosis_instruction": "What are the possible differential diagnoses for this patient?",
}

_TEMPLATE_KEY_BY_TASK = {
    TaskKind.findings_generation: "findings_instruction",
    TaskKind.impression_generation: "impression_instruction",
    TaskKind.diagnosis: "diagnosis_instruction",
}


def load_templates(path: str) -> dict[str, str]:
    """Parse a key=multiline-value template file.

    A line of the form ``key=value`` starts a new entry; following lines
    without ``=`` at a word boundary are appended to the current value.
    Missing keys fall back to the defaults.
    """
    templates = dict(DEFAULT_TEMPLATES)
    current: str | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh.read().splitlines():
            if "=" in raw:
                key, _, value = raw.partition("=")
                if key.strip().isidentifier():
                    current = key.strip()
                    templates[current] = value
                    continue
            if current is not None:
                templates[current] += "\n" + raw
    return templates


@dataclass(frozen=True)
class GenerationParams:
    max_tokens: int
    temperature: float = 0.0


@dataclass(frozen=True)
class PromptBundle:
    """Everything one request needs: instruction, exemplars, visual payload."""

    task: TaskKind
    instruction: str
    exemplars: tuple[str, ...]
    gaze_mode: GazeMode
    base_image: ImageRecord
    generation: GenerationParams
    reader_id: str = ""
    visual_payload: np.ndarray | FrameSet | None = None
    fixation_text: str | None = None
    findings_input: str | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exemplars", tuple(self.exemplars))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if self.gaze_mode is GazeMode.video and not isinstance(self.visual_payload, FrameSet):
            raise ValueError("video mode requires a FrameSet payload")
        if self.gaze_mode is not GazeMode.video and isinstance(self.visual_payload, FrameSet):
            raise ValueError(f"{self.gaze_mode.value} mode cannot carry a FrameSet payload")
        if self.task is TaskKind.impression_generation and not self.findings_input:
            raise ValueError("impression generation requires a findings text input")

    @property
    def image_id(self) -> str:
        return self.base_image.image_id


def instruction_for_task(
    task: TaskKind, templates: dict[str, str] | None, findings: str | None
) -> str:
    merged = dict(DEFAULT_TEMPLATES)
    if templates:
        merged.update(templates)
    text = merged[_TEMPLATE_KEY_BY_TASK[task]]
    if task is TaskKind.impression_generation:
        text = text.replace("{findings}", findings or "")
    return text


def build_prompt(
    task: TaskKind,
    gaze_mode: GazeMode,
    scanpath: ScanPath | None,
    image: ImageRecord,
    exemplars: list[str],
    findings: str | None = None,
    render_config: RenderConfig | None = None,
    templates: dict[str, str] | None = None,
    strict_exemplars: bool = False,
) -> PromptBundle:
    """Compose one task prompt, rendering the gaze payload as requested.

    A scanpath is required for every gaze mode except ``none``; findings
    are required exactly for impression generation.
    """
    task = TaskKind(task)
    gaze_mode = GazeMode(gaze_mode)
    render_config = render_config or RenderConfig()
    if gaze_mode is not GazeMode.none and scanpath is None:
        raise ValueError(f"gaze_mode={gaze_mode.value} requires a scanpath")
    if task is TaskKind.impression_generation and not findings:
        raise ValueError("impression generation requires a findings text input")
    if task is not TaskKind.impression_generation and findings:
        logger.debug("findings input ignored for task %s", task.value)
        findings = None

    warnings: list[str] = []
    if len(exemplars) != DEFAULT_EXEMPLAR_COUNT:
        message = f"expected {DEFAULT_EXEMPLAR_COUNT} exemplars, got {len(exemplars)}"
        if strict_exemplars:
            raise ValueError(message)
        warnings.append(message)
        logger.warning(message)

    payload: np.ndarray | FrameSet
    fixation_text = None
    if gaze_mode is GazeMode.video:
        assert scanpath is not None
        plan = plan_frames(scanpath, render_config)
        payload = render_video(image, scanpath, plan, render_config)
    elif gaze_mode is GazeMode.heatmap:
        assert scanpath is not None
        payload = render_heatmap(image, scanpath, render_config).image
    else:
        payload = load_rgb(image)
        if gaze_mode is GazeMode.fixation_text:
            assert scanpath is not None
            fixation_text = render_fixation_text(scanpath, image)

    max_tokens = DIAGNOSIS_MAX_TOKENS if task is TaskKind.diagnosis else REPORT_MAX_TOKENS
    return PromptBundle(
        task=task,
        instruction=instruction_for_task(task, templates, findings),
        exemplars=tuple(exemplars),
        gaze_mode=gaze_mode,
        base_image=image,
        reader_id=scanpath.reader_id if scanpath is not None else "",
        visual_payload=payload,
        fixation_text=fixation_text,
        findings_input=findings,
        generation=GenerationParams(max_tokens=max_tokens, temperature=0.0),
        warnings=tuple(warnings),
    )
