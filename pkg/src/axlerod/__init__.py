"""Axlerod: an agent-assistive insurance chatbot stack.

The package bundles a deterministic policy-data generator, structured and
full-text retrieval, a tool-calling conversation core, pluggable LLM
backends, an HTTP service, and an evaluation harness.
"""

from .backends import ReplayBackend, RemoteBackend, RemoteConfig, ScriptedBackend, build_backend
from .costing import UsageLedger, cost_microcents, estimate_cost, format_cost, load_price_table
from .docs import build_doc_index, chunk_documents, load_corpus_dir
from .evaluation import build_cases, render_report, run_eval, score
from .generate import generate_portfolio
from .policy import Money, Policy, PolicyNumber, PolicyStore, load_store, save_store
from .runtime import ServiceConfig, StartupError, build_runtime
from .search import build_policy_index
from .service import create_app, start_service
from .toolkit import (
    BackendError,
    Conversation,
    DuplicateToolError,
    LoopLimitError,
    Message,
    Toolbox,
    ToolResult,
    ToolSpec,
    run_turn,
    set_context,
)
from .tools import build_toolbox

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "Conversation",
    "DuplicateToolError",
    "LoopLimitError",
    "Message",
    "Money",
    "Policy",
    "PolicyNumber",
    "PolicyStore",
    "ReplayBackend",
    "RemoteBackend",
    "RemoteConfig",
    "ScriptedBackend",
    "ServiceConfig",
    "StartupError",
    "Toolbox",
    "ToolResult",
    "ToolSpec",
    "UsageLedger",
    "build_backend",
    "build_cases",
    "build_doc_index",
    "build_policy_index",
    "build_runtime",
    "build_toolbox",
    "chunk_documents",
    "cost_microcents",
    "create_app",
    "estimate_cost",
    "format_cost",
    "generate_portfolio",
    "load_corpus_dir",
    "load_price_table",
    "load_store",
    "render_report",
    "run_eval",
    "run_turn",
    "save_store",
    "score",
    "set_context",
    "start_service",
    "__version__",
]
