"""HTTP layer: session lifecycle, the chat endpoint, and health/introspection.

The chat endpoint mirrors the chat-completions response shape so generic
clients can parse it, extended with an "axlerod" block carrying tool
activity, per-turn cost, and the policy the turn resolved to (which the
widget uses for its context banner). Sessions are in-memory with a TTL and a
single-writer rule: a second chat on a session whose turn is still running
is rejected with 409 rather than interleaved.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .costing import cost_microcents, format_cost
from .policy import InvalidNumberError, PolicyNumber
from .runtime import Runtime, ServiceConfig, build_runtime
from .toolkit import (
    BackendError,
    Conversation,
    LoopLimitError,
    ResultStatus,
    TurnTrace,
    run_turn,
    set_context,
)


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _unknown_session(session_id: str) -> ServiceError:
    return ServiceError(404, "unknown_session",
                        f"no active session {session_id!r} (missing or expired)")


@dataclass
class Session:
    session_id: str
    conversation: Conversation
    backend: object
    created_at: float
    last_active: float
    in_flight: bool = False


@dataclass
class SessionStore:
    """In-memory sessions with TTL expiry and a per-session turn lock."""

    ttl_s: float = 1800.0
    clock: object = time.monotonic
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _sessions: dict = field(default_factory=dict)

    def _purge(self, now: float) -> None:
        dead = [
            sid for sid, s in self._sessions.items()
            if not s.in_flight and now - s.last_active > self.ttl_s
        ]
        for sid in dead:
            del self._sessions[sid]

    def create(self, conversation: Conversation, backend) -> Session:
        now = self.clock()
        session = Session(
            session_id=conversation.session_id,
            conversation=conversation,
            backend=backend,
            created_at=now,
            last_active=now,
        )
        with self._lock:
            self._purge(now)
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        now = self.clock()
        with self._lock:
            self._purge(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise _unknown_session(session_id)
            return session

    def begin_turn(self, session_id: str) -> Session:
        now = self.clock()
        with self._lock:
            self._purge(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise _unknown_session(session_id)
            if session.in_flight:
                raise ServiceError(
                    409, "turn_in_flight",
                    "a turn is already running on this session",
                )
            session.in_flight = True
            return session

    def end_turn(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None:
                session.in_flight = False
                session.last_active = self.clock()

    def touch(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None:
                session.last_active = self.clock()

    def count(self) -> int:
        with self._lock:
            return len(self._sessions)


def _resolved_policy(trace: TurnTrace) -> str | None:
    """The policy this turn landed on, if it unambiguously landed on one."""
    resolved = None
    for event in trace.tool_events:
        if event.result.status is not ResultStatus.OK:
            continue
        if event.call.tool_name == "policy_detail":
            resolved = event.result.payload.get("number")
        elif event.call.tool_name == "policy_search":
            payload = event.result.payload
            if payload.get("kind") == "hits" and payload.get("total") == 1:
                resolved = payload["hits"][0]["number"]
    return resolved


def _parse_context(value) -> PolicyNumber | None:
    if value in (None, ""):
        return None
    if not isinstance(value, str):
        raise ServiceError(422, "invalid_context", "context must be a string or null")
    try:
        return PolicyNumber.parse(value)
    except InvalidNumberError as exc:
        raise ServiceError(422, "invalid_context", str(exc))


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="axlerod", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionStore(ttl_s=runtime.config.session_ttl_s)
    app.state.runtime = runtime
    app.state.sessions = sessions

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid_request", "message": str(exc.errors())}},
        )

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "policies": len(runtime.store),
            "chunks": len(runtime.doc_index),
        }

    @app.get("/v1/tools")
    def list_tools():
        return {"tools": runtime.toolbox.describe()}

    @app.get("/v1/usage")
    def usage_totals():
        totals = runtime.ledger.global_totals()
        return {
            "prompt_tokens": totals.prompt_tokens,
            "completion_tokens": totals.completion_tokens,
            "cost_microcents": totals.cost_microcents,
            "cost": format_cost(totals.cost_microcents),
            "entries": totals.entries,
            "estimated_entries": totals.estimated_entries,
            "sessions": len(runtime.ledger.session_ids()),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: dict | None = None):
        context = _parse_context((body or {}).get("context"))
        conversation = Conversation.start(
            str(uuid.uuid4()),
            runtime.system_prompt,
            turn_budget=runtime.config.turn_budget,
        )
        if context is not None:
            set_context(conversation, context)
        try:
            backend = runtime.make_backend()
        except BackendError as exc:
            raise ServiceError(502, "backend_error", str(exc))
        session = sessions.create(conversation, backend)
        return {"session_id": session.session_id,
                "context": str(context) if context else None}

    @app.patch("/sessions/{session_id}/context")
    def patch_context(session_id: str, body: dict):
        context = _parse_context(body.get("context"))
        session = sessions.get(session_id)
        set_context(session.conversation, context)
        sessions.touch(session_id)
        return {"session_id": session_id,
                "context": str(context) if context else None}

    @app.post("/v1/chat/completions")
    def chat(
        body: dict,
        x_axlerod_session: str | None = Header(default=None),
    ):
        if not x_axlerod_session:
            raise ServiceError(422, "missing_session_header",
                               "X-Axlerod-Session header is required")
        messages = body.get("messages")
        if not isinstance(messages, list) or not messages:
            raise ServiceError(422, "invalid_request",
                               "body must carry a non-empty messages list")
        last = messages[-1]
        if not isinstance(last, dict) or last.get("role") != "user" \
                or not isinstance(last.get("content"), str) or not last["content"]:
            raise ServiceError(422, "invalid_request",
                               "last message must be a user message with text content")
        user_text = last["content"]

        session = sessions.begin_turn(x_axlerod_session)
        try:
            _, text, trace = run_turn(
                session.conversation, user_text, session.backend, runtime.toolbox
            )
        except LoopLimitError as exc:
            raise ServiceError(502, "loop_limit", str(exc))
        except BackendError as exc:
            raise ServiceError(502, "backend_error", str(exc))
        finally:
            sessions.end_turn(x_axlerod_session)

        model = getattr(session.backend, "model", "axlerod")
        turn_cost = cost_microcents(
            trace.prompt_tokens, trace.completion_tokens, runtime.price_table, model
        )
        runtime.ledger.record(
            session.session_id,
            trace.prompt_tokens,
            trace.completion_tokens,
            turn_cost,
            trace.usage_estimated,
        )
        return {
            "id": f"chatcmpl-{uuid.uuid4().hex[:24]}",
            "object": "chat.completion",
            "created": int(time.time()),
            "model": model,
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": text},
                    "finish_reason": "stop",
                }
            ],
            "usage": {
                "prompt_tokens": trace.prompt_tokens,
                "completion_tokens": trace.completion_tokens,
                "total_tokens": trace.prompt_tokens + trace.completion_tokens,
            },
            "axlerod": {
                "session_id": session.session_id,
                "tool_activity": [
                    {
                        "tool": e.call.tool_name,
                        "latency_ms": round(e.latency_ms, 1),
                        "status": e.result.status.value,
                    }
                    for e in trace.tool_events
                ],
                "cost_microcents": turn_cost,
                "cost": format_cost(turn_cost),
                "usage_estimated": trace.usage_estimated,
                "resolved_policy": _resolved_policy(trace),
                "elapsed_ms": round(trace.elapsed_ms, 1),
            },
        }

    if runtime.config.widget_dist is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount(
            "/demo",
            StaticFiles(directory=runtime.config.widget_dist, html=True),
            name="demo",
        )

    return app


def start_service(config: ServiceConfig):
    """Build the runtime, bind the listener, and serve until interrupted."""
    import uvicorn

    runtime = build_runtime(config)
    app = create_app(runtime)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
