"""Command-line entry point: serve, gen-data, index, eval, demo-replay.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .docs import CorpusError
from .evaluation import EvalError, build_cases, render_report, run_eval
from .generate import generate_portfolio
from .policy import save_store
from .runtime import (
    BACKEND_KINDS,
    DATA_DIR,
    ServiceConfig,
    StartupError,
    build_runtime,
)

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_runtime_flags(parser: argparse.ArgumentParser, store_seed_flag="--seed"):
    parser.add_argument("--store", type=Path, default=None,
                        help="policy store JSONL (default: generate in memory)")
    parser.add_argument(store_seed_flag, dest="store_seed", type=int, default=42,
                        help="seed for the generated store (default 42)")
    parser.add_argument("--count", type=int, default=1000,
                        help="policies to generate when no --store (default 1000)")
    parser.add_argument("--docs", type=Path, default=None,
                        help="documentation directory (default: bundled corpus)")
    parser.add_argument("--backend", choices=BACKEND_KINDS, default=None,
                        help="LLM backend (default: AXLEROD_BACKEND or scripted)")
    parser.add_argument("--transcript", type=Path, default=None,
                        help="replay transcript JSON (default: bundled demo)")
    parser.add_argument("--prices", type=Path, default=None,
                        help="price table JSON (default: bundled)")
    parser.add_argument("--system-prompt", type=Path, default=None,
                        help="system prompt file (default: bundled)")
    parser.add_argument("--refine-threshold", type=int, default=5,
                        help="search hits above this ask for refinement")
    parser.add_argument("--turn-budget", type=int, default=8,
                        help="max tool-loop iterations per turn")


def _config_from_args(args) -> ServiceConfig:
    config = ServiceConfig(
        store_path=args.store,
        seed=args.store_seed,
        count=args.count,
        docs_dir=args.docs,
        transcript_path=args.transcript,
        price_table_path=args.prices,
        system_prompt_path=args.system_prompt,
        refine_threshold=args.refine_threshold,
        turn_budget=args.turn_budget,
    )
    if args.backend is not None:
        config.backend = args.backend
    return config


def build_parser() -> _Parser:
    parser = _Parser(prog="axlerod",
                     description="Policy-desk assistant service and tooling.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--ttl", type=float, default=1800.0,
                       help="idle session expiry in seconds")
    serve.add_argument("--widget-dist", type=Path, default=None,
                       help="serve a built chat widget from this directory at /demo")
    _add_runtime_flags(serve)

    gen = sub.add_parser("gen-data", help="generate a synthetic policy store")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--out", type=Path, required=True)

    index = sub.add_parser("index", help="build indexes and report statistics")
    index.add_argument("--store", type=Path, required=True)
    index.add_argument("--docs", type=Path, default=None,
                       help="documentation directory (default: bundled corpus)")

    evaluate = sub.add_parser("eval", help="run the accuracy/latency/cost evaluation")
    evaluate.add_argument("--per-family", type=int, default=25,
                          help="cases per task family (default 25)")
    evaluate.add_argument("--seed", type=int, default=7,
                          help="case sampling seed (default 7)")
    evaluate.add_argument("--format", choices=("text", "json", "markdown"),
                          default="text")
    evaluate.add_argument("--out", type=Path, default=None,
                          help="write the report here instead of stdout")
    evaluate.add_argument("--raw-out", type=Path, default=None,
                          help="write per-case JSON lines here "
                               "(default: <out>.raw.jsonl when --out is set)")
    _add_runtime_flags(evaluate, store_seed_flag="--store-seed")

    demo = sub.add_parser("demo-replay",
                          help="print the recorded demo conversation")
    demo.add_argument("--transcript", type=Path, default=None,
                      help="transcript JSON (default: bundled demo)")
    _add_runtime_flags_subset(demo)
    return parser


def _add_runtime_flags_subset(parser):
    parser.add_argument("--store", type=Path, default=None)
    parser.add_argument("--seed", dest="store_seed", type=int, default=42)
    parser.add_argument("--count", type=int, default=1000)
    parser.add_argument("--docs", type=Path, default=None)


def _cmd_serve(args) -> int:
    from .service import start_service

    config = _config_from_args(args)
    config.host = args.host
    config.port = args.port
    config.session_ttl_s = args.ttl
    config.widget_dist = args.widget_dist
    try:
        start_service(config)
    except StartupError as exc:
        print(f"axlerod: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_gen_data(args) -> int:
    if args.count < 0:
        print("axlerod: error: --count must be non-negative", file=sys.stderr)
        return USAGE_ERROR
    try:
        store = generate_portfolio(args.seed, args.count)
        save_store(store, args.out)
    except OSError as exc:
        print(f"axlerod: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    print(f"wrote {len(store)} policies to {args.out} (seed {args.seed})")
    return 0


def _cmd_index(args) -> int:
    config = ServiceConfig(store_path=args.store, docs_dir=args.docs)
    try:
        runtime = build_runtime(config)
    except StartupError as exc:
        print(f"axlerod: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    postings = runtime.policy_index.postings
    print(f"policies indexed: {len(runtime.store)}")
    print(f"name/address tokens: {len(postings)}")
    print(f"doc chunks: {len(runtime.doc_index)}")
    print(f"doc vocabulary: {len(runtime.doc_index.doc_frequency)}")
    print(f"avg chunk length: {runtime.doc_index.avg_chunk_length:.1f} tokens")
    return 0


def _cmd_eval(args) -> int:
    if args.per_family < 1:
        print("axlerod: error: --per-family must be at least 1", file=sys.stderr)
        return USAGE_ERROR
    config = _config_from_args(args)
    raw_out = args.raw_out
    if raw_out is None and args.out is not None:
        raw_out = args.out.with_suffix(args.out.suffix + ".raw.jsonl")
    try:
        runtime = build_runtime(config)
        cases = build_cases(
            runtime.store, args.seed, args.per_family, runtime.policy_index
        )
        report = run_eval(runtime, cases, raw_out=raw_out)
    except (StartupError, EvalError, CorpusError) as exc:
        print(f"axlerod: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    rendered = render_report(report, args.format)
    if args.out is not None:
        args.out.write_text(rendered + "\n", encoding="utf-8")
        print(f"wrote report to {args.out}"
              + (f" (raw cases: {raw_out})" if raw_out else ""))
    else:
        print(rendered)
    return 0


def _cmd_demo_replay(args) -> int:
    from .backends import ReplayBackend, TranscriptExhausted
    from .toolkit import BackendError, Conversation, run_turn

    transcript_path = args.transcript or DATA_DIR / "demo_transcript.json"
    try:
        with open(transcript_path, "r", encoding="utf-8") as handle:
            transcript = json.load(handle)
        config = ServiceConfig(
            store_path=args.store, seed=args.store_seed, count=args.count,
            docs_dir=args.docs, backend="replay", transcript_path=transcript_path,
        )
        runtime = build_runtime(config)
        backend = ReplayBackend(transcript["responses"])
        conversation = Conversation.start("demo", runtime.system_prompt)
        for user_text in transcript["user_turns"]:
            print(f"agent> {user_text}")
            _, answer, _ = run_turn(conversation, user_text, backend,
                                    runtime.toolbox)
            print(f"axlerod> {answer}")
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"axlerod: error: bad transcript {transcript_path}: {exc}",
              file=sys.stderr)
        return RUNTIME_ERROR
    except (StartupError, TranscriptExhausted, BackendError) as exc:
        print(f"axlerod: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "gen-data": _cmd_gen_data,
    "index": _cmd_index,
    "eval": _cmd_eval,
    "demo-replay": _cmd_demo_replay,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
