"""Serialize prompt bundles into chat-completions request bodies.

One user turn carries, in order: exemplar text parts, the fixation-text
block when present, the instruction, then the image attachments (all k
frames for video mode, exactly one image otherwise) as base64 PNG data
URIs. Serialization is canonical (sorted keys) so equal bundles produce
byte-identical bodies and stable digests.
"""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

from .frames import FrameSet
from .imaging import encode_png
from .prompts import GazeMode, PromptBundle


def _image_part(png_bytes: bytes) -> dict:
    encoded = base64.b64encode(png_bytes).decode("ascii")
    return {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{encoded}"}}


def _text_part(text: str) -> dict:
    return {"type": "text", "text": text}


def bundle_images(bundle: PromptBundle) -> list[bytes]:
    """PNG payloads in attachment order."""
    payload = bundle.visual_payload
    if isinstance(payload, FrameSet):
        return [encode_png(frame) for frame in payload.frames]
    if isinstance(payload, np.ndarray):
        return [encode_png(payload)]
    raise ValueError("bundle has no visual payload to serialize")


def serialize_bundle(bundle: PromptBundle) -> dict:
    """Request body without the model name (the runner injects it)."""
    parts = [_text_part(ex) for ex in bundle.exemplars]
    if bundle.fixation_text is not None:
        parts.append(_text_part(bundle.fixation_text))
    parts.append(_text_part(bundle.instruction))
    parts.extend(_image_part(png) for png in bundle_images(bundle))
    return {
        "temperature": bundle.generation.temperature,
        "max_tokens": bundle.generation.max_tokens,
        "messages": [{"role": "user", "content": parts}],
    }


def encode_body(body: dict) -> bytes:
    """Canonical JSON bytes: sorted keys, compact separators."""
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def body_digest(body: dict) -> str:
    return hashlib.sha256(encode_body(body)).hexdigest()


def attachment_count(bundle: PromptBundle) -> int:
    if bundle.gaze_mode is GazeMode.video:
        payload = bundle.visual_payload
        assert isinstance(payload, FrameSet)
        return payload.k
    return 1
