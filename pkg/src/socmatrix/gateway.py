"""Service boundary: inspection, arbitration, live params, metrics, streaming.

Reads return single-tick-consistent snapshots and never mutate state; all
mutations are queued as kernel commands and applied at the next tick boundary,
so nothing bypasses tick phasing. Every non-success response carries exactly
one error object: {"error": {"code", "message", "entity"}}.
"""
from __future__ import annotations

import json
from typing import Any, Iterator

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from . import __version__
from .errors import ConflictStateError, WorldError
from .handshake import VERDICTS
from .runtime import KernelRuntime

STREAM_POLL_SECONDS = 0.2

_STATUS_CODES = {"not_found": 404, "conflict_state": 409, "validation": 422, "internal": 500}


def api_error(code: str, message: str, entity: str | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_CODES[code],
        content={"error": {"code": code, "message": message, "entity": entity}},
    )


def _ndjson(payload: dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def create_app(runtime: KernelRuntime, token: str) -> FastAPI:
    app = FastAPI(title="socmatrix gateway", version=__version__, docs_url=None, redoc_url=None)

    def authorized(request: Request) -> bool:
        return request.headers.get("authorization") == f"Bearer {token}"

    @app.get("/")
    def index() -> dict[str, Any]:
        return {
            "service": "socmatrix",
            "version": __version__,
            "endpoints": [
                "GET /v1/summary", "GET /v1/agents/{id}", "GET /v1/topology",
                "GET /v1/capsules", "GET /v1/conflicts?status=",
                "POST /v1/conflicts/{id}/verdict", "PATCH /v1/params/{name}",
                "GET /v1/metrics?window=", "GET /v1/stream?since=",
            ],
        }

    @app.get("/v1/summary")
    def summary() -> dict[str, Any]:
        return runtime.summary()

    @app.get("/v1/agents/{agent_id}")
    def agent(agent_id: str):
        try:
            return runtime.agent_view(agent_id)
        except WorldError as exc:
            return api_error("not_found", str(exc), agent_id)

    @app.get("/v1/topology")
    def topology() -> dict[str, Any]:
        return runtime.topology_view()

    @app.get("/v1/capsules")
    def capsules() -> dict[str, Any]:
        return runtime.capsules_view()

    @app.get("/v1/conflicts")
    def conflicts(status: str | None = None):
        try:
            return {"conflicts": runtime.conflicts_view(status)}
        except WorldError as exc:
            return api_error("validation", str(exc), status)

    @app.post("/v1/conflicts/{conflict_id}/verdict")
    async def post_verdict(conflict_id: int, request: Request):
        if not authorized(request):
            return api_error("validation", "missing or invalid bearer token", "authorization")
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return api_error("validation", "request body is not valid JSON", None)
        verdict = body.get("verdict")
        content = body.get("content")
        if verdict not in VERDICTS:
            return api_error("validation", f"verdict must be one of {list(VERDICTS)}", str(verdict))
        if verdict == "amend" and not content:
            return api_error("validation", "amend verdict requires non-empty content", "content")
        try:
            status = runtime.conflict_status(conflict_id)
        except WorldError as exc:
            return api_error("not_found", str(exc), str(conflict_id))
        if status != "pending":
            return api_error(
                "conflict_state", f"conflict {conflict_id} is already {status}", str(conflict_id)
            )
        command = {
            "kind": "verdict",
            "conflict_id": conflict_id,
            "verdict": verdict,
            "content": content,
            "arbiter": request.headers.get("x-arbiter", "anonymous"),
        }
        applies_at = runtime.enqueue(command)
        return {"accepted": True, "applies_at_tick": applies_at}

    @app.patch("/v1/params/{name}")
    async def patch_param(name: str, request: Request):
        if not authorized(request):
            return api_error("validation", "missing or invalid bearer token", "authorization")
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return api_error("validation", "request body is not valid JSON", None)
        if "value" not in body or not isinstance(body["value"], (int, float)):
            return api_error("validation", "body must carry a numeric 'value'", name)
        value = float(body["value"])
        try:
            spec = runtime.param_spec(name)
        except WorldError as exc:
            return api_error("validation", str(exc), name)
        if not spec["min"] <= value <= spec["max"]:
            return api_error(
                "validation",
                f"value {value} outside domain [{spec['min']}, {spec['max']}]",
                name,
            )
        applies_at = runtime.enqueue({"kind": "param", "name": name, "value": value})
        return {"accepted": True, "applies_at_tick": applies_at}

    @app.get("/v1/metrics")
    def metrics(window: int | None = None):
        try:
            return runtime.metrics_view(window)
        except WorldError as exc:
            return api_error("validation", str(exc), "window")

    @app.get("/v1/stream")
    def stream(since: int = 0, follow: bool = True, idle_timeout: float | None = None):
        head = runtime.head_seq()
        if since < 0 or since > head:
            return api_error(
                "validation", f"since={since} is ahead of head seq {head}", "since"
            )

        def generate() -> Iterator[str]:
            # since means "last seen seq": push strictly greater, no gaps.
            cursor = since
            while True:
                fresh = runtime.records_since(cursor)
                if fresh:
                    for record in fresh:
                        yield _ndjson(record.to_dict())
                    cursor = fresh[-1].seq
                    continue
                if not follow:
                    return
                if not runtime.wait_for_records(
                    cursor, idle_timeout if idle_timeout is not None else STREAM_POLL_SECONDS
                ):
                    if idle_timeout is not None:
                        return

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    @app.exception_handler(ConflictStateError)
    def conflict_state_handler(request: Request, exc: ConflictStateError):  # pragma: no cover
        return api_error("conflict_state", str(exc), None)

    @app.exception_handler(Exception)
    def internal_handler(request: Request, exc: Exception):
        return api_error("internal", str(exc), None)

    return app
