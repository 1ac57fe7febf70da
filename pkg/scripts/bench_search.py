#!/usr/bin/env python3
"""Measure indexed search against the linear-scan reference as stores grow.

Small experiment used while sizing the refinement threshold: generates
portfolios at several sizes, times both implementations on the same query
mix, and double-checks they agree on every outcome along the way.
"""

import argparse
import random
import time

from axlerod.generate import generate_portfolio
from axlerod.search import build_policy_index, linear_scan_search, policy_search


def _query_mix(store, rng, n):
    policies = store.sorted_policies()
    queries = []
    for _ in range(n):
        p = rng.choice(policies)
        name = p.named_insureds[0]
        queries.append(rng.choice([
            name,
            name.split()[-1],
            f"{name} {p.address.city}",
            p.address.street,
        ]))
    return queries


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[250, 1000, 4000])
    parser.add_argument("--queries", type=int, default=300)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    print(f"{'policies':>9}  {'build (ms)':>10}  {'indexed (us/q)':>14}  "
          f"{'linear (us/q)':>13}  {'speedup':>7}")
    for size in args.sizes:
        store = generate_portfolio(seed=args.seed, count=size)
        t0 = time.perf_counter()
        index = build_policy_index(store)
        build_ms = (time.perf_counter() - t0) * 1000

        queries = _query_mix(store, random.Random(args.seed + size), args.queries)

        t0 = time.perf_counter()
        fast = [policy_search(index, q) for q in queries]
        indexed_us = (time.perf_counter() - t0) * 1e6 / len(queries)

        t0 = time.perf_counter()
        slow = [linear_scan_search(store, q) for q in queries]
        linear_us = (time.perf_counter() - t0) * 1e6 / len(queries)

        for q, a, b in zip(queries, fast, slow):
            assert a.kind == b.kind and a.hits == b.hits, f"disagreement on {q!r}"

        print(f"{size:>9}  {build_ms:>10.1f}  {indexed_us:>14.1f}  "
              f"{linear_us:>13.1f}  {linear_us / indexed_us:>6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
