"""Assembles store, indexes, toolbox, prompt, prices, and backend factory.

This is everything the HTTP service and the eval harness share. Startup
failures are named by subsystem so an operator can tell a bad store path from
a bad docs directory without reading a traceback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .backends import ReplayBackend, RemoteBackend, RemoteConfig, ScriptedBackend
from .costing import PriceTable, UsageLedger, default_price_table, load_price_table
from .docs import CorpusError, DocIndex, build_doc_index, chunk_documents, load_corpus_dir
from .generate import generate_portfolio
from .policy import PolicyStore, StoreParseError, load_store
from .search import DEFAULT_REFINE_THRESHOLD, PolicyIndex, build_policy_index
from .toolkit import DEFAULT_TURN_BUDGET, Toolbox
from .tools import build_toolbox

DATA_DIR = Path(__file__).parent / "data"
BACKEND_KINDS = ("scripted", "replay", "remote")


class StartupError(Exception):
    """A subsystem failed to come up; `subsystem` names which one."""

    def __init__(self, subsystem: str, message: str):
        super().__init__(f"{subsystem}: {message}")
        self.subsystem = subsystem


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    store_path: Path | None = None
    seed: int = 42
    count: int = 1000
    docs_dir: Path | None = None
    backend: str = field(
        default_factory=lambda: os.environ.get("AXLEROD_BACKEND", "scripted")
    )
    transcript_path: Path | None = None
    price_table_path: Path | None = None
    refine_threshold: int = DEFAULT_REFINE_THRESHOLD
    turn_budget: int = DEFAULT_TURN_BUDGET
    system_prompt_path: Path | None = None
    session_ttl_s: float = 1800.0
    widget_dist: Path | None = None

    def validate(self) -> None:
        if self.backend not in BACKEND_KINDS:
            raise StartupError(
                "backend",
                f"unknown backend {self.backend!r}; expected one of "
                f"{', '.join(BACKEND_KINDS)}",
            )
        if self.count < 0:
            raise StartupError("store", "count must be non-negative")
        if self.refine_threshold < 1:
            raise StartupError("index", "refine_threshold must be at least 1")
        if self.turn_budget < 1:
            raise StartupError("backend", "turn_budget must be at least 1")


@dataclass
class Runtime:
    config: ServiceConfig
    store: PolicyStore
    policy_index: PolicyIndex
    doc_index: DocIndex
    toolbox: Toolbox
    price_table: PriceTable
    ledger: UsageLedger
    system_prompt: str

    def make_backend(self):
        """Fresh backend per session: replay cursors must not be shared."""
        kind = self.config.backend
        if kind == "scripted":
            return ScriptedBackend()
        if kind == "replay":
            path = self.config.transcript_path or DATA_DIR / "demo_transcript.json"
            return ReplayBackend.from_file(path)
        return RemoteBackend(RemoteConfig.from_env())


def build_runtime(config: ServiceConfig) -> Runtime:
    config.validate()

    if config.store_path is not None:
        try:
            store = load_store(config.store_path)
        except FileNotFoundError:
            raise StartupError("store", f"store file not found: {config.store_path}")
        except StoreParseError as exc:
            raise StartupError("store", f"{config.store_path}: {exc}")
    else:
        store = generate_portfolio(config.seed, config.count)

    docs_dir = config.docs_dir if config.docs_dir is not None else DATA_DIR / "docs"
    try:
        corpus = load_corpus_dir(docs_dir)
    except CorpusError as exc:
        raise StartupError("docs", str(exc))
    doc_index = build_doc_index(chunk_documents(corpus))

    policy_index = build_policy_index(store)
    toolbox = build_toolbox(
        store, policy_index, doc_index, refine_threshold=config.refine_threshold
    )

    if config.price_table_path is not None:
        try:
            price_table = load_price_table(config.price_table_path)
        except (OSError, KeyError, ValueError) as exc:
            raise StartupError("prices", f"{config.price_table_path}: {exc}")
    else:
        price_table = default_price_table()

    prompt_path = (
        config.system_prompt_path
        if config.system_prompt_path is not None
        else DATA_DIR / "system_prompt.txt"
    )
    try:
        system_prompt = Path(prompt_path).read_text(encoding="utf-8").strip()
    except OSError as exc:
        raise StartupError("prompt", str(exc))

    if config.backend == "replay" and config.transcript_path is not None:
        if not Path(config.transcript_path).is_file():
            raise StartupError(
                "backend", f"transcript not found: {config.transcript_path}"
            )

    return Runtime(
        config=config,
        store=store,
        policy_index=policy_index,
        doc_index=doc_index,
        toolbox=toolbox,
        price_table=price_table,
        ledger=UsageLedger(),
        system_prompt=system_prompt,
    )
