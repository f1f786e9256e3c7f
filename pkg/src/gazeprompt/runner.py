"""Dispatch prompt bundles to a chat-completions endpoint with bounded
concurrency, retries, temperature fallback, and append-only JSONL records.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable

import httpx

from .prompts import PromptBundle
from .wire import body_digest, encode_body, serialize_bundle

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_ERROR = "error"
STATUS_REJECTED_TEMPERATURE = "rejected_temperature"


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to send requests."""

    base_url: str
    model_name: str
    api_key_env: str = "LVLM_API_KEY"
    timeout_s: int = 60
    max_retries: int = 2
    temperature: float = 0.0
    temperature_fallback: float = 0.1
    max_parallel: int = 4
    backoff_base_s: float = 0.5

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError(f"timeout_s must be > 0, got {self.timeout_s}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if not 0 <= self.temperature <= 1:
            raise ValueError(f"temperature must be in [0, 1], got {self.temperature}")
        if self.max_parallel < 1:
            raise ValueError(f"max_parallel must be >= 1, got {self.max_parallel}")

    @property
    def chat_url(self) -> str:
        return self.base_url.rstrip("/") + "/chat/completions"


@dataclass(frozen=True)
class Attempt:
    temperature: float
    outcome: str  # ok | transport_error | http_error | rejected_temperature | malformed_response
    latency_ms: int
    http_status: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class InferenceRecord:
    request_id: str
    image_id: str
    reader_id: str
    task: str
    gaze_mode: str
    request_digest: str
    response_text: str
    status: str
    latency_ms: int
    attempt_count: int
    timestamp: str
    attempts: tuple[Attempt, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "image_id": self.image_id,
            "reader_id": self.reader_id,
            "task": self.task,
            "gaze_mode": self.gaze_mode,
            "request_digest": self.request_digest,
            "response_text": self.response_text,
            "status": self.status,
            "latency_ms": self.latency_ms,
            "attempt_count": self.attempt_count,
            "timestamp": self.timestamp,
            "attempts": [
                {
                    "temperature": a.temperature,
                    "outcome": a.outcome,
                    "latency_ms": a.latency_ms,
                    "http_status": a.http_status,
                    "error": a.error,
                }
                for a in self.attempts
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InferenceRecord":
        return cls(
            request_id=data["request_id"],
            image_id=data["image_id"],
            reader_id=data["reader_id"],
            task=data["task"],
            gaze_mode=data["gaze_mode"],
            request_digest=data["request_digest"],
            response_text=data["response_text"],
            status=data["status"],
            latency_ms=data["latency_ms"],
            attempt_count=data["attempt_count"],
            timestamp=data["timestamp"],
            attempts=tuple(
                Attempt(
                    temperature=a["temperature"],
                    outcome=a["outcome"],
                    latency_ms=a["latency_ms"],
                    http_status=a.get("http_status"),
                    error=a.get("error"),
                )
                for a in data.get("attempts", [])
            ),
        )


class RecordSink:
    """Append-only JSONL store; a single lock serializes writers."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: InferenceRecord) -> None:
        line = json.dumps(record.to_dict(), sort_keys=True) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()

    def read_all(self) -> list[InferenceRecord]:
        if not os.path.exists(self.path):
            return []
        records = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(InferenceRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError):
                    logger.warning("skipping unreadable record line in %s", self.path)
        return records

    def completed_digests(self) -> set[str]:
        return {r.request_digest for r in self.read_all() if r.status == STATUS_OK}


@dataclass
class BatchSummary:
    ok: int = 0
    failed: int = 0
    skipped: int = 0

    def to_dict(self) -> dict[str, int]:
        return {"ok": self.ok, "failed": self.failed, "skipped": self.skipped}


def _is_temperature_rejection(status_code: int, body_text: str) -> bool:
    return status_code == 400 and "temperature" in body_text.lower()


def _excerpt(text: str, limit: int = 200) -> str:
    return text if len(text) <= limit else text[:limit] + "..."


def execute_request(
    client: httpx.Client, url: str, body: dict, endpoint: EndpointConfig
) -> tuple[str, str, list[Attempt]]:
    """Run one request through the retry ladder.

    Returns (status, response_text, attempts). The temperature fallback is
    applied at most once and consumes one slot of the shared attempt
    budget, keeping attempt_count <= max_retries + 1.
    """
    attempts: list[Attempt] = []
    temperature = endpoint.temperature
    switched = False
    max_attempts = endpoint.max_retries + 1
    last_failure = STATUS_ERROR

    for attempt_no in range(1, max_attempts + 1):
        body = dict(body, temperature=temperature)
        started = time.monotonic()
        try:
            response = client.post(
                url, content=encode_body(body), headers={"Content-Type": "application/json"}
            )
        except httpx.HTTPError as exc:
            latency = int((time.monotonic() - started) * 1000)
            attempts.append(
                Attempt(
                    temperature=temperature,
                    outcome="transport_error",
                    latency_ms=latency,
                    error=_excerpt(str(exc)),
                )
            )
            last_failure = STATUS_ERROR
            if attempt_no < max_attempts:
                time.sleep(endpoint.backoff_base_s * 2 ** (attempt_no - 1))
            continue

        latency = int((time.monotonic() - started) * 1000)
        if response.status_code == 200:
            try:
                content = response.json()["choices"][0]["message"]["content"]
                if not isinstance(content, str) or not content:
                    raise ValueError("empty or non-text content")
            except (ValueError, KeyError, IndexError, TypeError):
                attempts.append(
                    Attempt(
                        temperature=temperature,
                        outcome="malformed_response",
                        latency_ms=latency,
                        http_status=200,
                        error=_excerpt(response.text),
                    )
                )
                return STATUS_ERROR, "", attempts
            attempts.append(
                Attempt(temperature=temperature, outcome="ok", latency_ms=latency, http_status=200)
            )
            return STATUS_OK, content, attempts

        if _is_temperature_rejection(response.status_code, response.text):
            attempts.append(
                Attempt(
                    temperature=temperature,
                    outcome="rejected_temperature",
                    latency_ms=latency,
                    http_status=response.status_code,
                    error=_excerpt(response.text),
                )
            )
            last_failure = STATUS_REJECTED_TEMPERATURE
            if not switched:
                switched = True
                temperature = endpoint.temperature_fallback
                continue  # no backoff: semantic retry, not a transport fault
            return STATUS_REJECTED_TEMPERATURE, "", attempts

        retryable = response.status_code >= 500
        attempts.append(
            Attempt(
                temperature=temperature,
                outcome="http_error",
                latency_ms=latency,
                http_status=response.status_code,
                error=_excerpt(response.text),
            )
        )
        last_failure = STATUS_ERROR
        if retryable and attempt_no < max_attempts:
            time.sleep(endpoint.backoff_base_s * 2 ** (attempt_no - 1))
            continue
        return STATUS_ERROR, "", attempts

    return last_failure, "", attempts


def run_batch(
    bundles: Iterable[PromptBundle], endpoint: EndpointConfig, sink: RecordSink
) -> BatchSummary:
    """Send every bundle once, skipping digests already recorded ok.

    Each bundle yields exactly one terminal record; at most
    ``endpoint.max_parallel`` requests are in flight.
    """
    completed = sink.completed_digests()
    summary = BatchSummary()
    summary_lock = threading.Lock()

    headers = {}
    api_key = os.environ.get(endpoint.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    def _process(bundle: PromptBundle, client: httpx.Client) -> None:
        body = {"model": endpoint.model_name, **serialize_bundle(bundle)}
        digest = body_digest(body)
        if digest in completed:
            with summary_lock:
                summary.skipped += 1
            return
        status, text, attempts = execute_request(client, endpoint.chat_url, body, endpoint)
        record = InferenceRecord(
            request_id=uuid.uuid4().hex,
            image_id=bundle.image_id,
            reader_id=bundle.reader_id,
            task=bundle.task.value,
            gaze_mode=bundle.gaze_mode.value,
            request_digest=digest,
            response_text=text,
            status=status,
            latency_ms=sum(a.latency_ms for a in attempts),
            attempt_count=len(attempts),
            timestamp=datetime.now(timezone.utc).isoformat(),
            attempts=tuple(attempts),
        )
        sink.append(record)
        with summary_lock:
            if status == STATUS_OK:
                summary.ok += 1
            else:
                summary.failed += 1

    bundle_iter = iter(bundles)
    with httpx.Client(timeout=endpoint.timeout_s, headers=headers) as client:
        with ThreadPoolExecutor(max_workers=endpoint.max_parallel) as pool:
            # keep at most 2*max_parallel bundles materialized: video bundles
            # carry rendered frames, so the stream is consumed lazily
            pending: set = set()

            def submit_next() -> bool:
                try:
                    bundle = next(bundle_iter)
                except StopIteration:
                    return False
                pending.add(pool.submit(_process, bundle, client))
                return True

            for _ in range(endpoint.max_parallel * 2):
                if not submit_next():
                    break
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    future.result()
                for _ in range(len(done)):
                    if not submit_next():
                        break
    return summary
