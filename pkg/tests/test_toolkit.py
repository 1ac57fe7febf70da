"""Conversation state, tool registration/dispatch, and the turn loop."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from axlerod.toolkit import (
    CONTEXT_LINE_PREFIX,
    Conversation,
    DuplicateToolError,
    LoopLimitError,
    Message,
    Role,
    Toolbox,
    ToolCall,
    ToolParam,
    ToolResult,
    ToolSpec,
    describe_tools,
    dispatch,
    register_tool,
    run_turn,
    set_context,
    tool_result_content,
)
from axlerod.wire import CompletionResponse, Usage

ECHO = ToolSpec(
    name="echo",
    description="Echo back the given text.",
    parameters=(ToolParam("text", "string", True, "text to echo"),),
)
BOOM = ToolSpec(name="boom", description="Always fails.", parameters=())


def _toolbox():
    box = Toolbox()
    register_tool(box, ECHO, lambda args: {"echoed": args["text"]})
    register_tool(box, BOOM, lambda args: (_ for _ in ()).throw(RuntimeError("kapow")))
    return box


class StubBackend:
    """Plays back a fixed list of (tool_calls, content) steps."""

    model = "stub"

    def __init__(self, steps):
        self.steps = list(steps)
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        calls, content = self.steps.pop(0)
        return CompletionResponse(
            content=content, tool_calls=tuple(calls), usage=Usage(10, 5, estimated=True)
        )


def test_tool_descriptor_shape():
    d = ECHO.descriptor()
    assert d["type"] == "function"
    assert d["function"]["name"] == "echo"
    assert d["function"]["parameters"]["properties"]["text"]["type"] == "string"
    assert d["function"]["parameters"]["required"] == ["text"]


def test_tool_names_must_be_snake_case():
    with pytest.raises(ValueError):
        ToolSpec(name="Echo!", description="x", parameters=())


def test_duplicate_registration_rejected():
    box = _toolbox()
    with pytest.raises(DuplicateToolError):
        register_tool(box, ECHO, lambda args: None)


def test_describe_preserves_registration_order():
    box = _toolbox()
    assert [d["function"]["name"] for d in describe_tools(box)] == ["echo", "boom"]


def test_dispatch_ok():
    box = _toolbox()
    result = dispatch(box, ToolCall("c1", "echo", {"text": "hi"}))
    assert result.status.value == "ok"
    assert result.payload == {"echoed": "hi"}
    assert json.loads(tool_result_content(result)) == {"echoed": "hi"}


def test_dispatch_unknown_tool():
    result = dispatch(_toolbox(), ToolCall("c1", "nope", {}))
    assert result.status.value == "error"
    assert "unknown tool" in result.payload


def test_dispatch_missing_required_argument():
    result = dispatch(_toolbox(), ToolCall("c1", "echo", {}))
    assert result.status.value == "error"
    assert "missing required argument" in result.payload
    assert "text" in result.payload


def test_dispatch_wraps_executor_exceptions():
    result = dispatch(_toolbox(), ToolCall("c1", "boom", {}))
    assert result.status.value == "error"
    assert "RuntimeError" in result.payload and "kapow" in result.payload
    assert json.loads(tool_result_content(result))["error"].startswith("RuntimeError")


def test_message_role_constraints():
    Message(Role.USER, content="hello")
    Message(Role.ASSISTANT, content="hi")
    Message(Role.ASSISTANT, tool_calls=(ToolCall("c", "echo", {}),))
    with pytest.raises(ValueError):
        Message(Role.USER, content=None)
    with pytest.raises(ValueError):
        Message(Role.ASSISTANT, content="x", tool_calls=(ToolCall("c", "echo", {}),))
    with pytest.raises(ValueError):
        Message(Role.TOOL, content="not allowed")


def test_message_round_trip():
    messages = [
        Message(Role.SYSTEM, content="sys"),
        Message(Role.USER, content="hi"),
        Message(Role.ASSISTANT, tool_calls=(ToolCall("c1", "echo", {"text": "x"}),)),
        Message(Role.TOOL, tool_result=ToolResult.ok("c1", {"echoed": "x"})),
        Message(Role.ASSISTANT, content="done"),
    ]
    for m in messages:
        assert Message.from_dict(m.to_dict()) == m


def test_conversation_round_trip():
    conv = Conversation.start("s1", "be helpful", turn_budget=4)
    conv.messages.append(Message(Role.USER, content="hello"))
    restored = Conversation.from_dict(conv.to_dict())
    assert restored == conv


def test_set_context_keeps_exactly_one_line():
    conv = Conversation.start("s1", "be helpful")
    conv = set_context(conv, "AUT0000001")
    conv = set_context(conv, "HOM0000002")
    system = conv.messages[0].content
    lines = [l for l in system.split("\n") if l.startswith(CONTEXT_LINE_PREFIX)]
    assert lines == [f"{CONTEXT_LINE_PREFIX}HOM0000002"]
    conv = set_context(conv, None)
    assert CONTEXT_LINE_PREFIX not in conv.messages[0].content
    assert conv.messages[0].content.rstrip() == "be helpful"


def test_set_context_validates_number():
    from axlerod.policy import InvalidNumberError

    conv = Conversation.start("s1", "x")
    with pytest.raises(InvalidNumberError):
        set_context(conv, "garbage")


@given(st.lists(st.sampled_from(["AUT0000001", "HOM0000002", "UMB0000003", None]), max_size=8))
def test_set_context_last_write_wins(updates):
    conv = Conversation.start("s1", "prompt text")
    for value in updates:
        conv = set_context(conv, value)
    system = conv.messages[0].content
    lines = [l for l in system.split("\n") if l.startswith(CONTEXT_LINE_PREFIX)]
    last = next((u for u in reversed(updates) if True), None) if updates else None
    if updates and updates[-1] is not None:
        assert lines == [f"{CONTEXT_LINE_PREFIX}{updates[-1]}"]
    else:
        assert lines == []


def test_run_turn_plain_answer():
    conv = Conversation.start("s1", "sys")
    backend = StubBackend([((), "direct answer")])
    conv, text, trace = run_turn(conv, "question", backend, _toolbox())
    assert text == "direct answer"
    assert [m.role for m in conv.messages] == [Role.SYSTEM, Role.USER, Role.ASSISTANT]
    assert len(trace.llm_calls) == 1
    assert trace.tool_events == []
    assert trace.prompt_tokens == 10 and trace.completion_tokens == 5
    assert trace.usage_estimated


def test_run_turn_tool_round_trip():
    conv = Conversation.start("s1", "sys")
    backend = StubBackend(
        [
            ((ToolCall("c1", "echo", {"text": "ping"}),), None),
            ((), "pong"),
        ]
    )
    conv, text, trace = run_turn(conv, "echo ping", backend, _toolbox())
    assert text == "pong"
    roles = [m.role for m in conv.messages]
    assert roles == [Role.SYSTEM, Role.USER, Role.ASSISTANT, Role.TOOL, Role.ASSISTANT]
    assert conv.messages[3].tool_result.payload == {"echoed": "ping"}
    assert len(trace.llm_calls) == 2
    assert [e.call.tool_name for e in trace.tool_events] == ["echo"]
    assert trace.prompt_tokens == 20  # summed across calls


def test_run_turn_sends_tool_descriptors_every_call():
    conv = Conversation.start("s1", "sys")
    backend = StubBackend([((ToolCall("c1", "echo", {"text": "a"}),), None), ((), "ok")])
    run_turn(conv, "hi", backend, _toolbox())
    for request in backend.requests:
        assert [t["function"]["name"] for t in request.tools] == ["echo", "boom"]


def test_run_turn_loop_limit():
    conv = Conversation.start("s1", "sys", turn_budget=3)
    backend = StubBackend([((ToolCall(f"c{i}", "echo", {"text": "x"}),), None) for i in range(3)])
    with pytest.raises(LoopLimitError):
        run_turn(conv, "spin", backend, _toolbox())
    # conversation still consistent: every assistant tool call got its result
    assert conv.messages[-1].role is Role.TOOL


def test_run_turn_rejects_empty_text():
    conv = Conversation.start("s1", "sys")
    with pytest.raises(ValueError):
        run_turn(conv, "", StubBackend([]), _toolbox())
