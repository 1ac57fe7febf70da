#!/usr/bin/env python3
"""Drive the reference conversation live through the scripted pipeline.

Unlike `axlerod demo-replay` (which replays a recorded transcript), this
runs the actual tool loop: the scripted backend reads each user turn,
decides which tool to call, and composes its answer from real tool output
over the seed-42 world. Prints tool activity and running cost per turn.
"""

import argparse

from axlerod.costing import cost_microcents, format_cost
from axlerod.runtime import ServiceConfig, build_runtime
from axlerod.toolkit import Conversation, run_turn

TURNS = [
    "What is John Sullivan's auto policy number?",
    "Sure, I'm looking for the John Sullivan in Fall River.",
    "What bill plan is that policy on?",
    "Is that policy enrolled in AutoPay?",
    "What vehicles are on that policy?",
    "When is the next payment for that policy due?",
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--store-seed", type=int, default=42)
    parser.add_argument("--count", type=int, default=1000)
    args = parser.parse_args(argv)

    runtime = build_runtime(ServiceConfig(seed=args.store_seed, count=args.count))
    backend = runtime.make_backend()
    conversation = Conversation.start("demo", runtime.system_prompt)

    total_cost = 0
    for user_text in TURNS:
        print(f"agent> {user_text}")
        conversation, answer, trace = run_turn(
            conversation, user_text, backend, runtime.toolbox
        )
        for event in trace.tool_events:
            print(f"   [tool] {event.call.tool_name} -> {event.result.status.value} "
                  f"({event.latency_ms:.1f} ms)")
        cost = cost_microcents(trace.prompt_tokens, trace.completion_tokens,
                               runtime.price_table, backend.model)
        total_cost += cost
        print(f"axlerod> {answer}")
        print(f"   [turn: {trace.prompt_tokens}+{trace.completion_tokens} tok, "
              f"{format_cost(cost)}]")
        print()
    print(f"conversation total: {format_cost(total_cost)} "
          f"across {len(TURNS)} turns")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
