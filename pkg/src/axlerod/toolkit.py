"""Tool registry, structured tool calls, and the multi-turn conversation loop.

The loop forwards the conversation plus machine-readable tool metadata to an
LLM backend. The backend either answers in text, ending the turn, or issues
structured tool calls, which are executed in order and appended as tool
messages before asking the backend again. Every tool failure is fed back to
the backend as an error-status result; the loop itself only aborts on a
backend failure or when the iteration budget runs out.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .policy import PolicyNumber

DEFAULT_TURN_BUDGET = 8

_TOOL_NAME_RE = re.compile(r"^[a-z_]+$")

CONTEXT_LINE_PREFIX = "CURRENT_POLICY: "


class ToolkitError(Exception):
    pass


class DuplicateToolError(ToolkitError):
    pass


class LoopLimitError(ToolkitError):
    """Tool loop exhausted its iteration budget without a final answer."""


class BackendError(ToolkitError):
    """Transport or wire-format failure talking to the LLM backend."""


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"
    TOOL = "tool"


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str  # string | integer | boolean
    required: bool
    description: str


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: tuple[ToolParam, ...]

    def __post_init__(self):
        if not _TOOL_NAME_RE.match(self.name):
            raise ValueError(f"tool name {self.name!r} must match [a-z_]+")

    def descriptor(self) -> dict:
        """Chat-completions function descriptor for this tool."""
        properties = {
            p.name: {"type": p.type, "description": p.description} for p in self.parameters
        }
        required = [p.name for p in self.parameters if p.required]
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                },
            },
        }


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    tool_name: str
    arguments: dict


class ResultStatus(str, Enum):
    OK = "ok"
    ERROR = "error"


@dataclass(frozen=True)
class ToolResult:
    call_id: str
    status: ResultStatus
    payload: object = None  # structured value on Ok, message text on Error

    @classmethod
    def ok(cls, call_id: str, payload) -> "ToolResult":
        return cls(call_id, ResultStatus.OK, payload)

    @classmethod
    def error(cls, call_id: str, message: str) -> "ToolResult":
        return cls(call_id, ResultStatus.ERROR, message)


@dataclass
class Message:
    role: Role
    content: str | None = None
    tool_calls: tuple[ToolCall, ...] = ()
    tool_result: ToolResult | None = None

    def __post_init__(self):
        if self.role in (Role.SYSTEM, Role.USER):
            if self.content is None or self.tool_calls or self.tool_result:
                raise ValueError(f"{self.role.value} message carries content only")
        elif self.role is Role.ASSISTANT:
            has_content = self.content is not None
            has_calls = bool(self.tool_calls)
            if has_content == has_calls:
                raise ValueError("assistant message carries content xor tool_calls")
            if self.tool_result:
                raise ValueError("assistant message cannot carry a tool result")
        else:
            if self.tool_result is None or self.content is not None or self.tool_calls:
                raise ValueError("tool message carries a tool result only")

    def to_dict(self) -> dict:
        obj: dict = {"role": self.role.value}
        if self.role in (Role.SYSTEM, Role.USER):
            obj["content"] = self.content
        elif self.role is Role.ASSISTANT:
            if self.content is not None:
                obj["content"] = self.content
            else:
                obj["tool_calls"] = [
                    {"call_id": c.call_id, "tool_name": c.tool_name, "arguments": c.arguments}
                    for c in self.tool_calls
                ]
        else:
            result = self.tool_result
            obj["tool_result"] = {
                "call_id": result.call_id,
                "status": result.status.value,
                "payload": result.payload,
            }
        return obj

    @classmethod
    def from_dict(cls, obj: dict) -> "Message":
        role = Role(obj["role"])
        if role in (Role.SYSTEM, Role.USER):
            return cls(role, content=obj["content"])
        if role is Role.ASSISTANT:
            if "tool_calls" in obj:
                calls = tuple(
                    ToolCall(c["call_id"], c["tool_name"], c["arguments"])
                    for c in obj["tool_calls"]
                )
                return cls(role, tool_calls=calls)
            return cls(role, content=obj["content"])
        r = obj["tool_result"]
        return cls(
            role,
            tool_result=ToolResult(r["call_id"], ResultStatus(r["status"]), r["payload"]),
        )


def system_message(text: str) -> Message:
    return Message(Role.SYSTEM, content=text)


def user_message(text: str) -> Message:
    return Message(Role.USER, content=text)


@dataclass
class Conversation:
    session_id: str
    messages: list[Message]
    context: PolicyNumber | None = None
    turn_budget: int = DEFAULT_TURN_BUDGET

    @classmethod
    def start(cls, session_id: str, system_prompt: str,
              turn_budget: int = DEFAULT_TURN_BUDGET) -> "Conversation":
        return cls(session_id, [system_message(system_prompt)], turn_budget=turn_budget)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "messages": [m.to_dict() for m in self.messages],
            "context": str(self.context) if self.context else None,
            "turn_budget": self.turn_budget,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Conversation":
        return cls(
            session_id=obj["session_id"],
            messages=[Message.from_dict(m) for m in obj["messages"]],
            context=PolicyNumber.parse(obj["context"]) if obj.get("context") else None,
            turn_budget=obj.get("turn_budget", DEFAULT_TURN_BUDGET),
        )


def set_context(conversation: Conversation, number: PolicyNumber | str | None) -> Conversation:
    """Bind the currently viewed policy; mirrored into the system message.

    Setting again replaces the existing CURRENT_POLICY line; None clears it.
    """
    if isinstance(number, str):
        number = PolicyNumber.parse(number)
    head = conversation.messages[0]
    lines = [
        line for line in (head.content or "").split("\n")
        if not line.startswith(CONTEXT_LINE_PREFIX)
    ]
    while lines and lines[-1] == "":
        lines.pop()
    if number is not None:
        lines.append(f"{CONTEXT_LINE_PREFIX}{number}")
    conversation.messages[0] = system_message("\n".join(lines))
    conversation.context = number
    return conversation


class Toolbox:
    """Ordered registry mapping tool names to metadata and executors."""

    def __init__(self):
        self._tools: dict[str, tuple[ToolSpec, Callable[[dict], object]]] = {}

    def register(self, spec: ToolSpec, executor: Callable[[dict], object]) -> "Toolbox":
        if spec.name in self._tools:
            raise DuplicateToolError(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = (spec, executor)
        return self

    def describe(self) -> list[dict]:
        """Wire-format descriptors in registration order."""
        return [spec.descriptor() for spec, _ in self._tools.values()]

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    def dispatch(self, call: ToolCall) -> ToolResult:
        """Execute one call; every failure comes back as an error result."""
        entry = self._tools.get(call.tool_name)
        if entry is None:
            return ToolResult.error(call.call_id, f"unknown tool: {call.tool_name}")
        spec, executor = entry
        for param in spec.parameters:
            if param.required and param.name not in call.arguments:
                return ToolResult.error(
                    call.call_id, f"missing required argument: {param.name}"
                )
        try:
            return ToolResult.ok(call.call_id, executor(call.arguments))
        except Exception as exc:  # noqa: BLE001 - failures must reach the LLM, not crash the loop
            return ToolResult.error(call.call_id, f"{type(exc).__name__}: {exc}")


def register_tool(toolbox: Toolbox, spec: ToolSpec, executor) -> Toolbox:
    return toolbox.register(spec, executor)


def describe_tools(toolbox: Toolbox) -> list[dict]:
    return toolbox.describe()


def dispatch(toolbox: Toolbox, call: ToolCall) -> ToolResult:
    return toolbox.dispatch(call)


@dataclass
class LlmCallRecord:
    latency_ms: float
    prompt_tokens: int
    completion_tokens: int
    usage_estimated: bool


@dataclass
class ToolEvent:
    call: ToolCall
    result: ToolResult
    latency_ms: float


@dataclass
class TurnTrace:
    """Everything observed while producing one assistant reply."""

    llm_calls: list[LlmCallRecord] = field(default_factory=list)
    tool_events: list[ToolEvent] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def prompt_tokens(self) -> int:
        return sum(c.prompt_tokens for c in self.llm_calls)

    @property
    def completion_tokens(self) -> int:
        return sum(c.completion_tokens for c in self.llm_calls)

    @property
    def usage_estimated(self) -> bool:
        return any(c.usage_estimated for c in self.llm_calls)


def run_turn(
    conversation: Conversation,
    user_text: str,
    backend,
    toolbox: Toolbox,
) -> tuple[Conversation, str, TurnTrace]:
    """Append the user message and loop the backend until it answers in text.

    Raises LoopLimitError when the iteration budget is exhausted and lets
    BackendError propagate; in both cases the conversation stays consistent,
    ending with the last appended message.
    """
    if not user_text:
        raise ValueError("user_text must be non-empty")
    from .wire import CompletionRequest  # local import to avoid a module cycle

    trace = TurnTrace()
    started = time.perf_counter()
    conversation.messages.append(user_message(user_text))
    descriptors = toolbox.describe()

    for _ in range(conversation.turn_budget):
        request = CompletionRequest(
            model=getattr(backend, "model", "axlerod"),
            messages=list(conversation.messages),
            tools=descriptors,
        )
        llm_started = time.perf_counter()
        response = backend.complete(request)
        llm_ms = (time.perf_counter() - llm_started) * 1000.0
        usage = response.usage
        trace.llm_calls.append(
            LlmCallRecord(llm_ms, usage.prompt_tokens, usage.completion_tokens, usage.estimated)
        )

        if response.tool_calls:
            conversation.messages.append(
                Message(Role.ASSISTANT, tool_calls=tuple(response.tool_calls))
            )
            for call in response.tool_calls:
                tool_started = time.perf_counter()
                result = toolbox.dispatch(call)
                tool_ms = (time.perf_counter() - tool_started) * 1000.0
                trace.tool_events.append(ToolEvent(call, result, tool_ms))
                conversation.messages.append(Message(Role.TOOL, tool_result=result))
            continue

        text = response.content or ""
        conversation.messages.append(Message(Role.ASSISTANT, content=text))
        trace.elapsed_ms = (time.perf_counter() - started) * 1000.0
        return conversation, text, trace

    trace.elapsed_ms = (time.perf_counter() - started) * 1000.0
    raise LoopLimitError(
        f"no final answer within {conversation.turn_budget} tool-loop iterations"
    )


def tool_result_content(result: ToolResult) -> str:
    """Wire text for a tool message: JSON payload, or a JSON error envelope."""
    if result.status is ResultStatus.OK:
        return json.dumps(result.payload, separators=(",", ":"), ensure_ascii=False)
    return json.dumps({"error": result.payload}, separators=(",", ":"), ensure_ascii=False)
