"""Release gate: one test per acceptance criterion, one line each in -v output.

Every check here runs against the canonical benchmark world (store seed 42,
1,000 policies, bundled docs, scripted backend) unless the criterion itself
says otherwise. These are intentionally end-to-end: they exercise the public
API the way an operator would, not internal helpers.
"""

import json
import random
import threading
import time

import pytest
from fastapi.testclient import TestClient

from axlerod.backends import ScriptedBackend
from axlerod.costing import PriceTable, UsageLedger, cost_microcents, estimate_cost
from axlerod.docs import brute_force_doc_scores, build_doc_index, chunk_documents, doc_search
from axlerod.evaluation import REFERENCE_FOOTNOTES, build_cases, render_report, run_eval
from axlerod.policy import BillPlan, Money, bill_plan_schedule
from axlerod.runtime import DATA_DIR, ServiceConfig, build_runtime
from axlerod.search import OutcomeKind, linear_scan_search, policy_search
from axlerod.service import create_app
from axlerod.toolkit import Conversation, run_turn
from axlerod.tools import DOCUMENTATION_SEARCH_SPEC, POLICY_DETAIL_SPEC, POLICY_SEARCH_SPEC
from axlerod.wire import dumps_request

from test_gateway import TESTDATA, _golden_request


@pytest.fixture(scope="module")
def oracle_eval(oracle_runtime):
    """The benchmark evaluation: 25 cases per family, scripted backend."""
    cases = build_cases(
        oracle_runtime.store, seed=7, per_family_count=25,
        index=oracle_runtime.policy_index,
    )
    started = time.perf_counter()
    report = run_eval(oracle_runtime, cases)
    elapsed_s = time.perf_counter() - started
    return report, elapsed_s


def test_reference_figures_are_footnotes_not_claims(oracle_eval):
    """Production-reported figures appear only as clearly-labeled reference
    footnotes; the report never presents them as this run's results."""
    report, _ = oracle_eval
    text = render_report(report, "text")
    for figure in ("93.18%", "80.7%", "99.0%", "93.7%", "99.3%",
                   "7.55", "5.13", "2.42", "$0.0075"):
        assert figure in text, f"reference figure {figure} missing from report"
    footnote_block = "\n".join(REFERENCE_FOOTNOTES)
    assert "production-reported; not reproduced by this run" in footnote_block
    assert footnote_block in text
    # and none of those figures leak into the measured rows above the footnotes
    measured = text.split(REFERENCE_FOOTNOTES[0])[0]
    assert "93.18%" not in measured
    print("PASS - reference figures rendered as non-reproduced footnotes")


def test_oracle_run_is_perfect_fast_and_clean(oracle_eval):
    """Scripted backend, seed-42 store of 1,000, 25 cases/family:
    100.00% in every family, under 30 s, zero backend errors."""
    report, elapsed_s = oracle_eval
    assert report.overall_n == 100
    assert report.backend_errors == 0, f"{report.backend_errors} backend errors"
    for family in report.families:
        assert family.n == 25
        assert family.accuracy_pct == 100.0, (
            f"{family.display_name}: {family.accuracy_pct}% "
            f"({family.correct}/{family.n})"
        )
    assert report.overall_accuracy_pct == 100.0
    assert elapsed_s < 30.0, f"took {elapsed_s:.1f}s"
    print(
        f"PASS - oracle run: 100.00% on all 4 families, "
        f"{elapsed_s:.2f}s, 0 backend errors"
    )


def test_search_and_ranking_match_reference_implementations(oracle_runtime):
    """200 mixed queries: indexed search equals the linear scan in membership
    AND order; BM25 scores within 1e-9 of the brute-force reference on a
    corpus of at least 500 chunks."""
    store, index = oracle_runtime.store, oracle_runtime.policy_index
    policies = store.sorted_policies()
    rng = random.Random(202)

    queries = []
    for _ in range(70):
        p = rng.choice(policies)
        queries.append(p.named_insureds[0])
    for _ in range(70):
        p = rng.choice(policies)
        queries.append(f"{p.named_insureds[0]} {p.address.city}")
    for _ in range(60):
        p = rng.choice(policies)
        queries.append(p.address.street)
    assert len(queries) == 200

    for query in queries:
        fast = policy_search(index, query)
        slow = linear_scan_search(store, query)
        assert fast.kind == slow.kind, query
        assert fast.total_matches == slow.total_matches, query
        assert [h.number for h in fast.hits] == [h.number for h in slow.hits], query
        assert [h.score for h in fast.hits] == [h.score for h in slow.hits], query

    words = (
        "premium deductible coverage claim adjuster liability collision "
        "comprehensive endorsement renewal cancellation inspection glass "
        "vehicle dwelling umbrella autopay installment draft notice limit"
    ).split()
    corpus = []
    states = ["MA", "ME", "NH", "ALL"]
    types = ["PersonalAuto", "Homeowners", "CommercialAuto", "Umbrella", "ALL"]
    for i in range(250):
        paragraphs = [
            " ".join(rng.choices(words, k=rng.randrange(50, 350)))
            for _ in range(rng.randrange(2, 6))
        ]
        corpus.append((f"d{i:03d}", rng.choice(states), rng.choice(types),
                       "\n\n".join(paragraphs)))
    chunks = chunk_documents(corpus)
    assert len(chunks) >= 500, f"only {len(chunks)} chunks"
    doc_index = build_doc_index(chunks)

    checked = 0
    for _ in range(40):
        query = " ".join(rng.choices(words, k=rng.randrange(1, 4)))
        state = rng.choice([None, "MA", "ME", "NH"])
        ptype = rng.choice([None, "PersonalAuto", "Umbrella"])
        reference = brute_force_doc_scores(chunks, query, state=state, policy_type=ptype)
        ranked = doc_search(doc_index, query, state=state, policy_type=ptype,
                            k=len(chunks))
        assert {c.chunk_id for c, _ in ranked} == set(reference)
        for chunk, score in ranked:
            assert abs(score - reference[chunk.chunk_id]) < 1e-9, chunk.chunk_id
            checked += 1
    assert checked > 0
    print(
        f"PASS - search oracle equivalence: 200 queries identical, "
        f"BM25 within 1e-9 on {len(chunks)} chunks ({checked} scores)"
    )


def test_refinement_rule_exhaustive_over_surnames(oracle_runtime):
    """Every surname in the store: candidate count above five must come back
    as a refinement request carrying the exact count, five or fewer as hits."""
    store, index = oracle_runtime.store, oracle_runtime.policy_index
    surnames = sorted({
        name.split()[-1]
        for p in store.sorted_policies()
        for name in p.named_insureds
    })
    assert len(surnames) >= 20
    refined = hits = 0
    for surname in surnames:
        oracle = linear_scan_search(store, surname, refine_threshold=10**9)
        count = oracle.total_matches
        outcome = policy_search(index, surname, refine_threshold=5)
        if count > 5:
            assert outcome.kind is OutcomeKind.NEEDS_REFINEMENT, surname
            assert outcome.total_matches == count, surname
            assert outcome.hits == ()
            refined += 1
        else:
            assert outcome.kind is OutcomeKind.HITS, surname
            assert outcome.total_matches == count, surname
            assert {h.number for h in outcome.hits} == {
                h.number for h in oracle.hits
            }, surname
            hits += 1
    assert refined > 0 and hits > 0, "store too uniform to exercise both arms"
    print(
        f"PASS - refinement rule exhaustive over {len(surnames)} surnames "
        f"({refined} refined, {hits} direct)"
    )


def test_billing_conservation_every_policy_every_plan(oracle_runtime):
    """Installments sum to the annual premium, to the cent, for all 1,000
    policies; all four bill plans are represented."""
    plans_seen = set()
    for policy in oracle_runtime.store.sorted_policies():
        schedule = bill_plan_schedule(policy)
        assert len(schedule) == policy.bill_plan.installment_count
        assert sum(a.cents for _, a in schedule) == policy.annual_premium.cents, (
            str(policy.number)
        )
        plans_seen.add(policy.bill_plan)
    assert plans_seen == set(BillPlan)
    print(
        f"PASS - billing conservation on {len(oracle_runtime.store)} policies, "
        f"all {len(plans_seen)} plans"
    )


def test_cost_arithmetic_exact_and_ledger_conserves(oracle_runtime):
    """1M input tokens at $1.25/M costs exactly $1.25; the shared ledger
    stays exact under 8 concurrent sessions of 50 turns each."""
    table = PriceTable.from_dict({
        "models": {"m": {"input_cents_per_mtok": 125, "output_cents_per_mtok": 500}}
    })
    assert cost_microcents(1_000_000, 0, table, "m") == 125_000_000
    assert estimate_cost(1_000_000, 0, table, "m") == Money(125)
    assert estimate_cost(1_000_000, 0, table, "m").format() == "$1.25"
    assert cost_microcents(1, 0, table, "m") == 125  # exact to the microcent
    assert cost_microcents(999_999, 1_000_000, table, "m") == (
        999_999 * 125 + 1_000_000 * 500
    )

    ledger = UsageLedger()
    runtime = oracle_runtime
    policy_numbers = [
        str(p.number) for p in runtime.store.sorted_policies()[:8]
    ]
    per_session_costs = {}
    failures = []

    def drive(session_idx: int):
        session_id = f"concurrent-{session_idx}"
        spent = 0
        try:
            backend = ScriptedBackend()
            conversation = Conversation.start(session_id, runtime.system_prompt)
            number = policy_numbers[session_idx]
            for turn in range(50):
                question = (
                    f"Is policy {number} enrolled in AutoPay?"
                    if turn % 2
                    else f"What bill plan is {number} on?"
                )
                _, _, trace = run_turn(conversation, question, backend,
                                       runtime.toolbox)
                cost = cost_microcents(
                    trace.prompt_tokens, trace.completion_tokens,
                    runtime.price_table, backend.model,
                )
                ledger.record(session_id, trace.prompt_tokens,
                              trace.completion_tokens, cost,
                              trace.usage_estimated)
                spent += cost
            per_session_costs[session_id] = spent
        except Exception as exc:  # surfaced after join
            failures.append((session_id, exc))

    threads = [threading.Thread(target=drive, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not failures, failures

    totals = ledger.global_totals()
    assert totals.entries == 8 * 50
    assert totals.cost_microcents == sum(per_session_costs.values())
    for session_id, spent in per_session_costs.items():
        assert ledger.session_totals(session_id).cost_microcents == spent
    assert totals.cost_microcents == sum(
        e.cost_microcents for e in ledger.entries()
    )
    print(
        f"PASS - cost arithmetic exact; ledger conserved "
        f"{totals.cost_microcents} microcents over 8x50 concurrent turns"
    )


def test_wire_bytes_match_goldens(oracle_runtime):
    """Serialized requests byte-match the hand-written fixtures, including
    the descriptors of all three tools."""
    fixture = json.loads((TESTDATA / "request_full.json").read_text(encoding="utf-8"))
    expected = json.dumps(fixture, separators=(",", ":"), ensure_ascii=False)
    assert dumps_request(_golden_request()) == expected

    # the runtime's live toolbox must expose exactly the descriptors the
    # fixture pins down, in the same order
    live = oracle_runtime.toolbox.describe()
    assert live == fixture["tools"]
    assert [d["function"]["name"] for d in live] == [
        "policy_detail", "policy_search", "documentation_search",
    ]
    assert live[0] == POLICY_DETAIL_SPEC.descriptor()
    assert live[1] == POLICY_SEARCH_SPEC.descriptor()
    assert live[2] == DOCUMENTATION_SEARCH_SPEC.descriptor()
    print(f"PASS - wire golden byte-match ({len(expected)} bytes, 3 tool descriptors)")


def test_recorded_demo_replays_verbatim_through_the_service():
    """The bundled transcript, replayed through the HTTP API, reproduces the
    reference dialogue word for word."""
    transcript = json.loads(
        (DATA_DIR / "demo_transcript.json").read_text(encoding="utf-8")
    )
    runtime = build_runtime(ServiceConfig(
        seed=42, count=1000, backend="replay",
        transcript_path=DATA_DIR / "demo_transcript.json",
    ))
    expected_dialogue = [
        (
            "What is John Sullivan's auto policy number?",
            "I found several auto policies for John Sullivan. Could you "
            "provide more information to help me narrow down the search, "
            "such as a city or address?",
        ),
        (
            "Sure, I'm looking for the John Sullivan in Fall River.",
            "I found one auto policy for John Sullivan in Fall River:\n"
            "AUT9000007 — 47 Pleasant St, Fall River, MA 02721 "
            "(powerdesk://policy/AUT9000007)",
        ),
        (
            "What bill plan is that policy on?",
            "This policy is on a 12-Pay bill plan.",
        ),
    ]
    assert transcript["user_turns"] == [u for u, _ in expected_dialogue]

    with TestClient(create_app(runtime)) as client:
        session = client.post("/sessions", json={})
        assert session.status_code == 201
        sid = session.json()["session_id"]
        for user_text, expected_answer in expected_dialogue:
            response = client.post(
                "/v1/chat/completions",
                headers={"X-Axlerod-Session": sid},
                json={"messages": [{"role": "user", "content": user_text}]},
            )
            assert response.status_code == 200
            answer = response.json()["choices"][0]["message"]["content"]
            assert answer == expected_answer
    print("PASS - recorded demo replayed verbatim over the service API (3 turns)")


def test_scripted_latency_under_100ms_and_average_time_row(oracle_eval):
    """Mean per-turn latency with the scripted backend stays under 100 ms,
    and the rendered table carries the summary 'Average Time' row."""
    report, _ = oracle_eval
    mean_ms = report.overall_mean_latency_s * 1000.0
    assert mean_ms < 100.0, f"mean per-turn latency {mean_ms:.1f} ms"
    for family in report.families:
        assert family.mean_latency_s * 1000.0 < 100.0, family.display_name

    text = render_report(report, "text")
    [row] = [line for line in text.splitlines() if line.startswith("Average Time")]
    assert f"{report.overall_mean_latency_s:.3f}" in row
    markdown = render_report(report, "markdown")
    assert "| Average Time |" in markdown
    print(f"PASS - scripted mean per-turn latency {mean_ms:.2f} ms; Average Time row present")
