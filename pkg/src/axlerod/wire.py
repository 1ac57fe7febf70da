"""Chat-completions wire format: request serialization and response parsing.

Internal messages carry tool arguments and results as structured values; on
the wire, function arguments travel as a JSON-encoded string and tool results
as plain text content, matching the chat-completions convention. Usage is
taken from the provider when present and estimated from character counts when
absent, flagged so downstream accounting can tell the two apart.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .costing import count_tokens_fallback
from .toolkit import Message, Role, ToolCall, tool_result_content


class WireFormatError(Exception):
    """Response body does not follow the chat-completions shape."""


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int
    completion_tokens: int
    estimated: bool = False

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass
class CompletionRequest:
    model: str
    messages: list[Message]
    tools: list[dict] = field(default_factory=list)
    temperature: float = 0.0


@dataclass
class CompletionResponse:
    content: str | None
    tool_calls: list[ToolCall]
    usage: Usage
    finish_reason: str = "stop"
    raw: dict | None = None


def message_to_wire(message: Message) -> dict:
    if message.role in (Role.SYSTEM, Role.USER):
        return {"role": message.role.value, "content": message.content}
    if message.role is Role.ASSISTANT:
        if message.tool_calls:
            return {
                "role": "assistant",
                "content": None,
                "tool_calls": [
                    {
                        "id": call.call_id,
                        "type": "function",
                        "function": {
                            "name": call.tool_name,
                            "arguments": json.dumps(
                                call.arguments, separators=(",", ":"), ensure_ascii=False
                            ),
                        },
                    }
                    for call in message.tool_calls
                ],
            }
        return {"role": "assistant", "content": message.content}
    result = message.tool_result
    return {
        "role": "tool",
        "tool_call_id": result.call_id,
        "content": tool_result_content(result),
    }


def messages_to_wire(messages: list[Message]) -> list[dict]:
    return [message_to_wire(m) for m in messages]


def serialize_request(request: CompletionRequest) -> dict:
    return {
        "model": request.model,
        "messages": messages_to_wire(request.messages),
        "tools": request.tools,
        "temperature": request.temperature,
    }


def dumps_request(request: CompletionRequest) -> str:
    return json.dumps(serialize_request(request), separators=(",", ":"), ensure_ascii=False)


def _wire_call(obj: dict) -> ToolCall:
    try:
        call_id = obj["id"]
        function = obj["function"]
        name = function["name"]
        raw_arguments = function["arguments"]
    except (KeyError, TypeError) as exc:
        raise WireFormatError(f"malformed tool call: {exc}") from exc
    try:
        arguments = json.loads(raw_arguments)
    except (json.JSONDecodeError, TypeError) as exc:
        raise WireFormatError(f"tool call arguments are not valid JSON: {exc}") from exc
    if not isinstance(arguments, dict):
        raise WireFormatError("tool call arguments must decode to an object")
    return ToolCall(call_id=call_id, tool_name=name, arguments=arguments)


def estimate_usage(request: CompletionRequest, content: str | None,
                   tool_calls: list[ToolCall]) -> Usage:
    """Character-count fallback when the provider omits a usage block."""
    prompt_chars = dumps_request(request)
    if tool_calls:
        completion_chars = json.dumps(
            [
                {"name": c.tool_name, "arguments": c.arguments}
                for c in tool_calls
            ],
            separators=(",", ":"),
            ensure_ascii=False,
        )
    else:
        completion_chars = content or ""
    return Usage(
        prompt_tokens=count_tokens_fallback(prompt_chars),
        completion_tokens=count_tokens_fallback(completion_chars),
        estimated=True,
    )


def parse_response(obj, request: CompletionRequest | None = None) -> CompletionResponse:
    """Decode a chat-completions response body.

    Accepts a decoded object, a JSON string, or bytes. Raises WireFormatError
    on anything that does not carry exactly one assistant choice.
    """
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise WireFormatError(f"response body is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise WireFormatError("response body must be a JSON object")

    choices = obj.get("choices")
    if not isinstance(choices, list) or not choices:
        raise WireFormatError("response carries no choices")
    first = choices[0]
    if not isinstance(first, dict) or not isinstance(first.get("message"), dict):
        raise WireFormatError("choice carries no message")
    message = first["message"]

    raw_calls = message.get("tool_calls") or []
    if not isinstance(raw_calls, list):
        raise WireFormatError("tool_calls must be a list")
    tool_calls = [_wire_call(c) for c in raw_calls]
    content = message.get("content")
    if content is not None and not isinstance(content, str):
        raise WireFormatError("message content must be a string")
    if tool_calls and content:
        raise WireFormatError("message carries both content and tool calls")
    if not tool_calls and content is None:
        raise WireFormatError("message carries neither content nor tool calls")
    if tool_calls:
        content = None

    raw_usage = obj.get("usage")
    if isinstance(raw_usage, dict) and "prompt_tokens" in raw_usage:
        try:
            usage = Usage(
                prompt_tokens=int(raw_usage["prompt_tokens"]),
                completion_tokens=int(raw_usage.get("completion_tokens", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise WireFormatError(f"malformed usage block: {exc}") from exc
    elif request is not None:
        usage = estimate_usage(request, content, tool_calls)
    else:
        usage = Usage(prompt_tokens=0, completion_tokens=0, estimated=True)

    return CompletionResponse(
        content=content,
        tool_calls=tool_calls,
        usage=usage,
        finish_reason=first.get("finish_reason") or "stop",
        raw=obj,
    )
