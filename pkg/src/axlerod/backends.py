"""LLM backends: deterministic scripted rules, transcript replay, and remote.

The scripted backend is a rule table, not a language model: it recognizes the
handful of question shapes the assistant is evaluated on (policy number
lookup by name, attribute questions by policy number, refinement follow-ups,
"this policy" context references, documentation questions) and drives the
tools exactly the way a well-behaved model should. Because it is a pure
function of the request, any end-to-end failure under it is a pipeline bug.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

from .toolkit import (
    BackendError,
    CONTEXT_LINE_PREFIX,
    Message,
    ResultStatus,
    Role,
    ToolCall,
)
from .wire import (
    CompletionRequest,
    CompletionResponse,
    Usage,
    WireFormatError,
    dumps_request,
    estimate_usage,
    parse_response,
)

SCRIPTED_MODEL = "axlerod-scripted"
REPLAY_MODEL = "axlerod-replay"

REFINE_PROMPT = (
    "Could you provide more information to help me narrow down the search, "
    "such as a city or address?"
)
FALLBACK_REPLY = "I cannot help with that."

_NUMBER_RE = re.compile(r"\b(AUT|HOM|CAU|UMB)(\d{7})\b", re.IGNORECASE)
_WORD_RE = re.compile(r"[A-Za-z][A-Za-z']*")

# Capitalized words that never belong to a person/place name in our question
# shapes — sentence starters and domain nouns.
_STOP_CAPS = frozenset({
    "a", "an", "and", "are", "autopay", "auto", "bill", "can", "could", "did",
    "do", "does", "find", "for", "get", "give", "hello", "hey", "hi", "how",
    "i", "im", "is", "it", "list", "look", "looking", "may", "me", "might",
    "my", "no", "number", "ok", "okay", "on", "or", "our", "plan", "please",
    "policies", "policy", "should", "show", "sure", "tell", "thank", "thanks",
    "that", "the", "their", "this", "vehicle", "vehicles", "vin", "what",
    "when", "where", "which", "who", "why", "will", "would", "yes",
})

_KIND_WORDS = {
    "PersonalAuto": "auto",
    "Homeowners": "homeowners",
    "CommercialAuto": "commercial auto",
    "Umbrella": "umbrella",
}


def _policy_numbers(text: str) -> list[str]:
    return [f"{m.group(1).upper()}{m.group(2)}" for m in _NUMBER_RE.finditer(text)]


def _name_runs(text: str) -> list[str]:
    """Contiguous runs of capitalized, non-stopword words ('John Sullivan')."""
    runs: list[list[str]] = []
    current: list[str] = []
    for raw in _WORD_RE.findall(text):
        word = raw[:-2] if raw.lower().endswith("'s") else raw
        word = word.strip("'")
        # Contractions like "I'm" reduce to their stopword ("im") once the
        # apostrophe is dropped, so they never masquerade as names.
        stop_key = word.lower().replace("'", "")
        if word and word[0].isupper() and stop_key not in _STOP_CAPS:
            current.append(word)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return [" ".join(run) for run in runs]


def _mentions_auto(text: str) -> bool:
    return "auto" in re.findall(r"[a-z0-9]+", text.lower())


def _last_user_index(messages: list[Message]) -> int:
    for i in range(len(messages) - 1, -1, -1):
        if messages[i].role is Role.USER:
            return i
    return -1


def _system_context(messages: list[Message]) -> str | None:
    if not messages or messages[0].role is not Role.SYSTEM:
        return None
    for line in (messages[0].content or "").split("\n"):
        if line.startswith(CONTEXT_LINE_PREFIX):
            return line[len(CONTEXT_LINE_PREFIX):].strip()
    return None


def _last_number_in_history(messages: list[Message]) -> str | None:
    for message in reversed(messages):
        if message.role is Role.ASSISTANT and message.content:
            numbers = _policy_numbers(message.content)
            if numbers:
                return numbers[-1]
    return None


def _originating_call(messages: list[Message], call_id: str) -> ToolCall | None:
    for message in reversed(messages):
        if message.role is Role.ASSISTANT:
            for call in message.tool_calls:
                if call.call_id == call_id:
                    return call
    return None


def _prior_search_call(messages: list[Message]) -> ToolCall | None:
    for message in reversed(messages):
        if message.role is Role.ASSISTANT:
            for call in reversed(message.tool_calls):
                if call.tool_name == "policy_search":
                    return call
    return None


def _awaiting_refinement(messages: list[Message], before: int) -> bool:
    for message in reversed(messages[:before]):
        if message.role is Role.ASSISTANT and message.content is not None:
            return "narrow down the search" in message.content
    return False


def _money_display(value) -> str:
    if isinstance(value, dict):
        return value.get("display", "")
    return str(value)


class ScriptedBackend:
    """Deterministic rule-table stand-in for the LLM. Pure per request."""

    model = SCRIPTED_MODEL

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        messages = request.messages
        if not messages or messages[0].role is not Role.SYSTEM:
            raise BackendError("conversation must start with a system message")
        user_at = _last_user_index(messages)
        if user_at < 0:
            raise BackendError("conversation carries no user message")
        user_text = messages[user_at].content or ""

        turn_results = [
            m.tool_result for m in messages[user_at + 1:] if m.role is Role.TOOL
        ]
        if turn_results:
            content = self._compose_answer(messages, user_text, turn_results[-1])
            return self._reply(request, content=content)

        call = self._choose_call(messages, user_text)
        if call is None:
            return self._reply(request, content=FALLBACK_REPLY)
        if isinstance(call, str):
            return self._reply(request, content=call)
        return self._reply(request, tool_calls=[call])

    # -- turn phase 1: decide what to do with a fresh user message ----------

    def _choose_call(self, messages, user_text):
        call_id = f"call_{len(messages)}"
        numbers = _policy_numbers(user_text)
        if numbers:
            return ToolCall(call_id, "policy_detail", {"number": numbers[0]})

        lowered = user_text.lower()
        if "this policy" in lowered or "that policy" in lowered:
            number = _system_context(messages) or _last_number_in_history(messages)
            if number is None:
                return "Which policy do you mean? Please give me a policy number."
            return ToolCall(call_id, "policy_detail", {"number": number})

        runs = _name_runs(user_text)
        query = " ".join(runs)
        if _awaiting_refinement(messages, len(messages) - 1):
            prior = _prior_search_call(messages)
            if prior is not None and query:
                arguments = dict(prior.arguments)
                prior_tokens = set(arguments.get("query", "").lower().split())
                if not prior_tokens <= set(query.lower().split()):
                    query = f"{arguments.get('query', '')} {query}".strip()
                arguments["query"] = query
                if _mentions_auto(user_text):
                    arguments["policy_type"] = "PersonalAuto"
                return ToolCall(call_id, "policy_search", arguments)

        if sum(len(run.split()) for run in runs) >= 2:
            arguments = {"query": query}
            if _mentions_auto(user_text):
                arguments["policy_type"] = "PersonalAuto"
            return ToolCall(call_id, "policy_search", arguments)

        if any(word in lowered for word in
               ("coverage", "deductible", "claim", "covered", "endorsement")):
            return ToolCall(call_id, "documentation_search", {"query": user_text})
        return None

    # -- turn phase 2: compose the answer from the latest tool result -------

    def _compose_answer(self, messages, user_text, result) -> str:
        call = _originating_call(messages, result.call_id)
        tool = call.tool_name if call else ""
        if result.status is ResultStatus.ERROR:
            if tool == "policy_detail" and call:
                return (f"I could not find a policy numbered "
                        f"{call.arguments.get('number', '')}.")
            return f"I ran into a problem looking that up: {result.payload}"
        if tool == "policy_search":
            return self._search_answer(call, result.payload)
        if tool == "policy_detail":
            return self._detail_answer(user_text, result.payload)
        if tool == "documentation_search":
            return self._docs_answer(result.payload)
        return FALLBACK_REPLY

    def _search_answer(self, call, payload) -> str:
        query = call.arguments.get("query", "") if call else ""
        type_filter = call.arguments.get("policy_type") if call else None
        kind_word = _KIND_WORDS.get(type_filter, "") if type_filter else ""
        kind_prefix = f"{kind_word} " if kind_word else ""

        if payload.get("kind") == "needs_refinement":
            return (f"I found several {kind_prefix}policies for {query}. "
                    f"{REFINE_PROMPT}")
        hits = payload.get("hits", [])
        if not hits:
            return f'I could not find any policies matching "{query}".'
        if len(hits) == 1:
            hit = hits[0]
            word = _KIND_WORDS.get(hit.get("policy_type"), "")
            prefix = f"{word} " if word else ""
            return (
                f"I found one {prefix}policy for {hit['named_insureds'][0]} "
                f"in {hit['city']}:\n"
                f"{hit['number']} — {hit['address_line']} "
                f"(powerdesk://policy/{hit['number']})"
            )
        lines = [f"I found {len(hits)} {kind_prefix}policies for {query}:"]
        for hit in hits:
            lines.append(f"- {hit['number']} — {hit['address_line']}")
        return "\n".join(lines)

    def _detail_answer(self, user_text: str, policy: dict) -> str:
        lowered = user_text.lower()
        number = policy.get("number", "")
        if "autopay" in lowered:
            if policy.get("autopay_enrolled"):
                return f"Policy {number} is enrolled in AutoPay."
            return f"Policy {number} is not enrolled in AutoPay."
        if "vehicle" in lowered or "car" in lowered:
            vehicles = policy.get("vehicles", [])
            if not vehicles:
                return (f"Policy {number} has no covered vehicles; it is a "
                        f"{policy.get('policy_type', '')} policy.")
            listed = ", ".join(
                f"{v['display']} (VIN {v['vin']})" for v in vehicles
            )
            return f"Policy {number} covers the following vehicles: {listed}."
        if "plan" in lowered:
            return (f"This policy is on a "
                    f"{policy.get('bill_plan_display', '')} bill plan.")
        if "due" in lowered or "payment" in lowered:
            amount = _money_display(policy.get("next_payment_amount"))
            return (f"The next payment for policy {number} is {amount}, "
                    f"due on {policy.get('next_payment_date', '')}.")
        insureds = ", ".join(policy.get("named_insureds", []))
        premium = _money_display(policy.get("annual_premium"))
        return (
            f"Policy {number} ({policy.get('policy_type', '')}) is issued to "
            f"{insureds}; annual premium {premium} on a "
            f"{policy.get('bill_plan_display', '')} bill plan."
        )

    def _docs_answer(self, payload) -> str:
        chunks = payload.get("chunks", [])
        if not chunks:
            return "I could not find anything relevant in the documentation."
        top = chunks[0]
        body = top["text"]
        if len(body) > 400:
            body = body[:400].rsplit(" ", 1)[0] + "…"
        return f"From {top['source_doc']}: {body}"

    # -- plumbing ------------------------------------------------------------

    def _reply(self, request, content=None, tool_calls=None) -> CompletionResponse:
        calls = tool_calls or []
        return CompletionResponse(
            content=content,
            tool_calls=calls,
            usage=estimate_usage(request, content, calls),
            finish_reason="tool_calls" if calls else "stop",
        )


class TranscriptExhausted(BackendError):
    pass


class ReplayBackend:
    """Plays back recorded responses in order, ignoring request content."""

    model = REPLAY_MODEL

    def __init__(self, entries: list[dict]):
        self._entries = list(entries)
        self._cursor = 0

    @classmethod
    def from_file(cls, path) -> "ReplayBackend":
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        return cls(data["responses"] if isinstance(data, dict) else data)

    @property
    def remaining(self) -> int:
        return len(self._entries) - self._cursor

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        if self._cursor >= len(self._entries):
            raise TranscriptExhausted(
                f"transcript exhausted after {len(self._entries)} responses"
            )
        entry = self._entries[self._cursor]
        self._cursor += 1

        raw_usage = entry.get("usage")
        if raw_usage:
            usage = Usage(
                prompt_tokens=int(raw_usage["prompt_tokens"]),
                completion_tokens=int(raw_usage["completion_tokens"]),
            )
        else:
            usage = Usage(0, 0, estimated=True)

        if "tool_call" in entry:
            spec = entry["tool_call"]
            call = ToolCall(
                call_id=f"replay_{self._cursor}",
                tool_name=spec["name"],
                arguments=spec["arguments"],
            )
            return CompletionResponse(
                content=None, tool_calls=[call], usage=usage,
                finish_reason="tool_calls",
            )
        return CompletionResponse(
            content=entry["content"], tool_calls=[], usage=usage,
            finish_reason="stop",
        )


@dataclass
class RemoteConfig:
    base_url: str
    api_key: str = ""
    model: str = "gpt-4o-mini"
    timeout_s: float = 60.0

    @classmethod
    def from_env(cls, environ=os.environ) -> "RemoteConfig":
        base_url = environ.get("AXLEROD_LLM_BASE_URL", "")
        if not base_url:
            raise BackendError("AXLEROD_LLM_BASE_URL is not set")
        return cls(
            base_url=base_url,
            api_key=environ.get("AXLEROD_LLM_API_KEY", ""),
            model=environ.get("AXLEROD_LLM_MODEL", "gpt-4o-mini"),
        )


class RemoteBackend:
    """chat-completions over HTTP; retries once on transient failure."""

    def __init__(self, config: RemoteConfig, transport=None):
        import httpx

        self.config = config
        self.model = config.model
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            headers=headers,
            timeout=config.timeout_s,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        import httpx

        body = dumps_request(request).encode("utf-8")
        last_failure = None
        for attempt in range(2):
            try:
                http_response = self._client.post("/chat/completions", content=body)
            except httpx.TransportError as exc:
                last_failure = f"transport failure: {exc}"
                continue
            if http_response.status_code >= 500:
                last_failure = f"HTTP {http_response.status_code}"
                continue
            if http_response.status_code >= 400:
                raise BackendError(
                    f"HTTP {http_response.status_code}: {http_response.text[:200]}"
                )
            try:
                return parse_response(http_response.content, request)
            except WireFormatError as exc:
                raise BackendError(str(exc)) from exc
        raise BackendError(f"request failed after retry: {last_failure}")


def build_backend(kind: str, transcript_path=None, environ=os.environ):
    """Factory keyed by AXLEROD_BACKEND-style names."""
    if kind == "scripted":
        return ScriptedBackend()
    if kind == "replay":
        if transcript_path is None:
            raise BackendError("replay backend requires a transcript path")
        return ReplayBackend.from_file(transcript_path)
    if kind == "remote":
        return RemoteBackend(RemoteConfig.from_env(environ))
    raise BackendError(f"unknown backend kind: {kind!r}")
