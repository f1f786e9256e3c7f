"""Mock chat-completions endpoint for dry runs and tests.

Behaves like a minimal vision-model serving layer: accepts the standard
request body, optionally rejects a configured temperature (mirroring
endpoints that refuse greedy decoding), optionally fails the first N
requests, and keeps in-memory counters the tests can assert on.
"""

from __future__ import annotations

import asyncio
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

DEFAULT_RESPONSE_TEXT = "No acute cardiopulmonary abnormality."


def create_mock_app(
    response_text: str = DEFAULT_RESPONSE_TEXT,
    reject_temperature: float | None = None,
    fail_first: int = 0,
    delay_s: float = 0.0,
) -> FastAPI:
    app = FastAPI(title="mock-lvlm")
    state = app.state
    state.response_text = response_text
    state.reject_temperature = reject_temperature
    state.fail_first = fail_first
    state.delay_s = delay_s
    state.requests = []  # parsed request bodies, in arrival order
    state.request_count = 0
    state.active = 0
    state.max_active = 0
    state.lock = threading.Lock()

    @app.post("/chat/completions")
    async def chat_completions(request: Request):
        with state.lock:
            state.active += 1
            state.max_active = max(state.max_active, state.active)
        try:
            body = await request.json()
            if state.delay_s:
                await asyncio.sleep(state.delay_s)
            with state.lock:
                state.request_count += 1
                count = state.request_count
                state.requests.append(body)
            if count <= state.fail_first:
                return JSONResponse(
                    status_code=503, content={"error": {"message": "temporarily overloaded"}}
                )
            temperature = body.get("temperature")
            if state.reject_temperature is not None and temperature == state.reject_temperature:
                return JSONResponse(
                    status_code=400,
                    content={
                        "error": {
                            "message": f"temperature {temperature} is not supported by this model",
                            "type": "invalid_request_error",
                        }
                    },
                )
            return {
                "id": f"mock-{count}",
                "object": "chat.completion",
                "model": body.get("model", "mock"),
                "choices": [
                    {
                        "index": 0,
                        "message": {"role": "assistant", "content": state.response_text},
                        "finish_reason": "stop",
                    }
                ],
                "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
            }
        finally:
            with state.lock:
                state.active -= 1

    @app.get("/stats")
    def stats():
        with state.lock:
            return {
                "request_count": state.request_count,
                "max_active": state.max_active,
            }

    return app
