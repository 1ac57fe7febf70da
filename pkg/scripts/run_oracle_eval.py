#!/usr/bin/env python3
"""Run the benchmark evaluation against the deterministic oracle world.

The defaults reproduce the release gate: store seed 42, 1,000 policies,
scripted backend, 25 cases per task family. Expected outcome is 100.00%
accuracy in every family with zero backend errors; anything else means a
pipeline regression, not a hard benchmark.
"""

import argparse
import sys
import time
from pathlib import Path

from axlerod.evaluation import build_cases, render_report, run_eval
from axlerod.runtime import ServiceConfig, build_runtime


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--store-seed", type=int, default=42)
    parser.add_argument("--count", type=int, default=1000, help="policies to generate")
    parser.add_argument("--seed", type=int, default=7, help="case sampling seed")
    parser.add_argument("--per-family", type=int, default=25)
    parser.add_argument("--backend", default="scripted",
                        choices=["scripted", "replay", "remote"])
    parser.add_argument("--format", default="text", choices=["text", "markdown", "json"])
    parser.add_argument("--out", type=Path, default=None,
                        help="also write the report to this file")
    parser.add_argument("--raw-out", type=Path, default=None,
                        help="write per-case JSONL here")
    args = parser.parse_args(argv)

    runtime = build_runtime(ServiceConfig(
        seed=args.store_seed, count=args.count, backend=args.backend,
    ))
    cases = build_cases(runtime.store, seed=args.seed,
                        per_family_count=args.per_family,
                        index=runtime.policy_index)
    started = time.perf_counter()
    report = run_eval(runtime, cases, raw_out=args.raw_out)
    elapsed = time.perf_counter() - started

    rendered = render_report(report, args.format)
    print(rendered)
    print(f"\nwall time: {elapsed:.2f}s for {report.overall_n} cases", file=sys.stderr)
    if args.out is not None:
        args.out.write_text(rendered + "\n", encoding="utf-8")
        print(f"report written to {args.out}", file=sys.stderr)
    return 0 if report.overall_accuracy_pct == 100.0 and report.backend_errors == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
