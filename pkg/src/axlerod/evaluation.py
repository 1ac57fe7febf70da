"""Accuracy / latency / cost evaluation over four question families.

Each case is a single-turn question about one sampled policy, asked in a
fresh session and scored by normalized containment against ground truth read
straight from the store. The report mirrors the production team's summary
table: one row per task family plus an "Average Time" row, with their
production-reported figures printed as non-reproduced reference footnotes.
"""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .costing import cost_microcents, format_cost
from .policy import AUTO_TYPES, PolicyStore, PolicyType
from .runtime import Runtime
from .search import OutcomeKind, build_policy_index, policy_search
from .toolkit import BackendError, Conversation, LoopLimitError, run_turn

REFERENCE_FOOTNOTES = (
    "Reference figures from the production deployment "
    "(production-reported; not reproduced by this run):",
    "  overall accuracy 93.18%; per-task accuracy 80.7% / 99.0% / 93.7% / 99.3%;",
    "  average handling time 7.55 s unassisted vs 5.13 s assisted "
    "(2.42 s saved per search);",
    "  average cost per answer $0.0075.",
)

_VIN_IN_TEXT_RE = re.compile(r"\b[A-HJ-NPR-Z0-9]{17}\b")
_NORMALIZE_RE = re.compile(r"[^a-z0-9-]+")


class EvalError(Exception):
    pass


class EmptyStoreError(EvalError):
    pass


class EmptyCaseSetError(EvalError):
    pass


class EvalAborted(EvalError):
    """More than 10% of cases hit backend failures; the run is invalid."""


class TaskFamily(str, Enum):
    FIND_POLICY_NUMBER = "FindPolicyNumber"
    AUTOPAY_ELIGIBILITY = "AutopayEligibility"
    COVERED_VEHICLES = "CoveredVehicles"
    BILL_PLAN = "BillPlan"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def slot(self) -> str:
        return "name" if self is TaskFamily.FIND_POLICY_NUMBER else "policy_number"


_DISPLAY_NAMES = {
    TaskFamily.FIND_POLICY_NUMBER: "Find Policy Number",
    TaskFamily.AUTOPAY_ELIGIBILITY: "Get Autopay Eligibility",
    TaskFamily.COVERED_VEHICLES: "Get Covered Vehicles",
    TaskFamily.BILL_PLAN: "Get Bill Plan",
}

TEMPLATES: dict[TaskFamily, tuple[str, ...]] = {
    TaskFamily.FIND_POLICY_NUMBER: (
        "What is {name}'s auto policy number?",
        "Can you find the auto policy number for {name}?",
        "I need the policy number for {name}'s auto policy.",
        "Look up {name}'s auto policy number, please.",
        "Find the auto policy number for {name}.",
    ),
    TaskFamily.AUTOPAY_ELIGIBILITY: (
        "Is policy {policy_number} enrolled in AutoPay?",
        "Does {policy_number} have AutoPay enabled?",
        "Check the AutoPay enrollment status for {policy_number}.",
        "Is the insured on {policy_number} signed up for AutoPay?",
        "Tell me whether {policy_number} is on AutoPay.",
    ),
    TaskFamily.COVERED_VEHICLES: (
        "What vehicles are covered by {policy_number}?",
        "List the vehicles on policy {policy_number}.",
        "Which cars are insured under {policy_number}?",
        "What vehicles does {policy_number} cover?",
        "Show me the covered vehicles for {policy_number}.",
    ),
    TaskFamily.BILL_PLAN: (
        "What bill plan is {policy_number} on?",
        "Which bill plan does policy {policy_number} use?",
        "What is the bill plan for {policy_number}?",
        "Tell me the bill plan on {policy_number}.",
        "What payment plan is policy {policy_number} set up with?",
    ),
}


@dataclass(frozen=True)
class EvalCase:
    family: TaskFamily
    query: str
    policy_number: str
    ground_truth: object


def _ground_truth(family: TaskFamily, policy) -> object:
    if family is TaskFamily.FIND_POLICY_NUMBER:
        return str(policy.number)
    if family is TaskFamily.AUTOPAY_ELIGIBILITY:
        return policy.autopay_enrolled
    if family is TaskFamily.COVERED_VEHICLES:
        return [
            {"year": v.year, "make": v.make, "model": v.model, "vin": v.vin}
            for v in policy.vehicles
        ]
    return policy.bill_plan.display_name


def _family_pool(family: TaskFamily, store: PolicyStore, index) -> list:
    policies = store.sorted_policies()
    if family is TaskFamily.FIND_POLICY_NUMBER:
        # Only subjects whose first-insured name search resolves without a
        # refinement round-trip: these cases are single-turn by design.
        pool = []
        for p in policies:
            if p.policy_type is not PolicyType.PERSONAL_AUTO:
                continue
            outcome = policy_search(
                index, p.named_insureds[0], type_filter=PolicyType.PERSONAL_AUTO.value
            )
            if outcome.kind is OutcomeKind.HITS:
                pool.append(p)
        return pool
    if family is TaskFamily.COVERED_VEHICLES:
        return [p for p in policies if p.policy_type in AUTO_TYPES]
    return policies


def build_cases(
    store: PolicyStore,
    seed: int,
    per_family_count: int,
    index=None,
) -> list[EvalCase]:
    """Deterministic case sample: per-family pools, cycled paraphrases."""
    if len(store) == 0:
        raise EmptyStoreError("cannot build cases over an empty store")
    if per_family_count < 0:
        raise ValueError("per_family_count must be non-negative")
    if index is None:
        index = build_policy_index(store)

    rng = random.Random(seed)
    cases: list[EvalCase] = []
    for family in TaskFamily:
        pool = _family_pool(family, store, index)
        if not pool:
            raise EmptyStoreError(f"no eligible policies for {family.value}")
        if len(pool) >= per_family_count:
            picks = rng.sample(pool, per_family_count)
        else:
            picks = rng.choices(pool, k=per_family_count)
        templates = TEMPLATES[family]
        for i, policy in enumerate(picks):
            template = templates[i % len(templates)]
            if family is TaskFamily.FIND_POLICY_NUMBER:
                query = template.format(name=policy.named_insureds[0])
            else:
                query = template.format(policy_number=policy.number)
            cases.append(
                EvalCase(
                    family=family,
                    query=query,
                    policy_number=str(policy.number),
                    ground_truth=_ground_truth(family, policy),
                )
            )
    return cases


# -- scoring ------------------------------------------------------------------


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation (hyphens survive), collapse whitespace."""
    return " ".join(_NORMALIZE_RE.sub(" ", text.lower()).split())


def _autopay_verdict(normalized: str) -> bool | None:
    if "not enrolled" in normalized:
        return False
    if "enrolled" in normalized:
        return True
    tokens = normalized.split()
    if "yes" in tokens:
        return True
    if "no" in tokens:
        return False
    return None


def score(answer_text: str, ground_truth, family: TaskFamily) -> bool:
    normalized = normalize_answer(answer_text)
    if family is TaskFamily.FIND_POLICY_NUMBER:
        return normalize_answer(str(ground_truth)) in normalized
    if family is TaskFamily.AUTOPAY_ELIGIBILITY:
        verdict = _autopay_verdict(normalized)
        return verdict is not None and verdict == bool(ground_truth)
    if family is TaskFamily.COVERED_VEHICLES:
        vehicles = list(ground_truth)
        for vehicle in vehicles:
            wanted = normalize_answer(f"{vehicle['make']} {vehicle['model']}")
            if wanted not in normalized:
                return False
        allowed_vins = {v["vin"] for v in vehicles}
        found_vins = set(_VIN_IN_TEXT_RE.findall(answer_text))
        return found_vins <= allowed_vins
    return normalize_answer(str(ground_truth)) in normalized


# -- running ------------------------------------------------------------------


@dataclass
class CaseResult:
    case: EvalCase
    answer: str
    correct: bool
    latency_ms: float
    cost_microcents: int
    tool_calls: list[str]
    backend_error: str | None = None

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "family": self.case.family.value,
                "query": self.case.query,
                "truth": self.case.ground_truth,
                "answer": self.answer,
                "correct": self.correct,
                "latency_ms": round(self.latency_ms, 3),
                "cost_microcents": self.cost_microcents,
                "tool_calls": self.tool_calls,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )


@dataclass
class FamilyResult:
    family: str
    display_name: str
    n: int
    correct: int
    accuracy_pct: float
    mean_latency_s: float
    mean_cost_microcents: int


@dataclass
class EvalReport:
    families: list[FamilyResult]
    overall_n: int
    overall_correct: int
    overall_accuracy_pct: float
    overall_mean_latency_s: float
    overall_mean_cost_microcents: int
    backend_errors: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "families": [vars(f).copy() for f in self.families],
            "overall": {
                "n": self.overall_n,
                "correct": self.overall_correct,
                "accuracy_pct": self.overall_accuracy_pct,
                "mean_latency_s": self.overall_mean_latency_s,
                "mean_cost_microcents": self.overall_mean_cost_microcents,
                "backend_errors": self.backend_errors,
            },
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvalReport":
        overall = obj["overall"]
        return cls(
            families=[FamilyResult(**f) for f in obj["families"]],
            overall_n=overall["n"],
            overall_correct=overall["correct"],
            overall_accuracy_pct=overall["accuracy_pct"],
            overall_mean_latency_s=overall["mean_latency_s"],
            overall_mean_cost_microcents=overall["mean_cost_microcents"],
            backend_errors=overall["backend_errors"],
            metadata=dict(obj.get("metadata", {})),
        )


def _aggregate(results: list[CaseResult], backend_errors: int,
               metadata: dict) -> EvalReport:
    families = []
    for family in TaskFamily:
        rows = [r for r in results if r.case.family is family]
        if not rows:
            continue
        n = len(rows)
        correct = sum(1 for r in rows if r.correct)
        families.append(
            FamilyResult(
                family=family.value,
                display_name=family.display_name,
                n=n,
                correct=correct,
                accuracy_pct=round(100.0 * correct / n, 2),
                mean_latency_s=round(
                    sum(r.latency_ms for r in rows) / n / 1000.0, 3
                ),
                mean_cost_microcents=round(
                    sum(r.cost_microcents for r in rows) / n
                ),
            )
        )
    n = len(results)
    correct = sum(1 for r in results if r.correct)
    return EvalReport(
        families=families,
        overall_n=n,
        overall_correct=correct,
        overall_accuracy_pct=round(100.0 * correct / n, 2),
        overall_mean_latency_s=round(
            sum(r.latency_ms for r in results) / n / 1000.0, 3
        ),
        overall_mean_cost_microcents=round(
            sum(r.cost_microcents for r in results) / n
        ),
        backend_errors=backend_errors,
        metadata=metadata,
    )


def run_eval(
    runtime: Runtime,
    cases: list[EvalCase],
    raw_out: str | Path | None = None,
) -> EvalReport:
    """Run every case in a fresh session and aggregate a report.

    Aborts with EvalAborted once backend failures exceed 10% of the case
    count — a run that unhealthy measures the backend, not the assistant.
    """
    if not cases:
        raise EmptyCaseSetError("no cases to run")
    max_backend_errors = len(cases) // 10
    shared_backend = (
        runtime.make_backend() if runtime.config.backend == "remote" else None
    )

    results: list[CaseResult] = []
    backend_errors = 0
    model_name = "axlerod"
    for i, case in enumerate(cases):
        session_id = f"eval-{i:05d}"
        conversation = Conversation.start(
            session_id, runtime.system_prompt, turn_budget=runtime.config.turn_budget
        )
        backend = shared_backend or runtime.make_backend()
        started = time.perf_counter()
        try:
            _, answer, trace = run_turn(
                conversation, case.query, backend, runtime.toolbox
            )
        except (BackendError, LoopLimitError) as exc:
            backend_errors += 1
            if backend_errors > max_backend_errors:
                raise EvalAborted(
                    f"{backend_errors} backend failures over {i + 1} cases "
                    f"(limit {max_backend_errors}); last: {exc}"
                ) from exc
            results.append(
                CaseResult(
                    case=case,
                    answer="",
                    correct=False,
                    latency_ms=(time.perf_counter() - started) * 1000.0,
                    cost_microcents=0,
                    tool_calls=[],
                    backend_error=str(exc),
                )
            )
            continue

        model = model_name = getattr(backend, "model", "axlerod")
        turn_cost = cost_microcents(
            trace.prompt_tokens, trace.completion_tokens, runtime.price_table, model
        )
        runtime.ledger.record(
            session_id, trace.prompt_tokens, trace.completion_tokens,
            turn_cost, trace.usage_estimated,
        )
        results.append(
            CaseResult(
                case=case,
                answer=answer,
                correct=score(answer, case.ground_truth, case.family),
                latency_ms=trace.elapsed_ms,
                cost_microcents=runtime.ledger.session_totals(
                    session_id
                ).cost_microcents,
                tool_calls=[e.call.tool_name for e in trace.tool_events],
            )
        )

    if raw_out is not None:
        with open(raw_out, "w", encoding="utf-8") as handle:
            for result in results:
                handle.write(result.to_json_line() + "\n")

    metadata = {
        "store_seed": runtime.store.seed,
        "policies": len(runtime.store),
        "backend": runtime.config.backend,
        "model": model_name,
        "cases": len(cases),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return _aggregate(results, backend_errors, metadata)


# -- rendering -----------------------------------------------------------------


def _text_table(report: EvalReport) -> list[str]:
    headers = ["Tasks", "Cases", "Correct", "Accuracy", "Mean Time (s)", "Mean Cost"]
    rows = [
        [
            f.display_name,
            str(f.n),
            str(f.correct),
            f"{f.accuracy_pct:.2f}%",
            f"{f.mean_latency_s:.3f}",
            format_cost(f.mean_cost_microcents),
        ]
        for f in report.families
    ]
    rows.append(
        [
            "Average Time",
            str(report.overall_n),
            str(report.overall_correct),
            f"{report.overall_accuracy_pct:.2f}%",
            f"{report.overall_mean_latency_s:.3f}",
            format_cost(report.overall_mean_cost_microcents),
        ]
    )
    widths = [
        max(len(headers[c]), *(len(r[c]) for r in rows)) for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[c]) for c, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[c] for c in range(len(headers))),
    ]
    for row in rows:
        lines.append(
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
        )
    return lines


def render_report(report: EvalReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt not in ("text", "markdown"):
        raise ValueError(f"unknown report format {fmt!r}")

    meta = report.metadata
    header = (
        f"Evaluation: {meta.get('cases', report.overall_n)} cases, "
        f"backend={meta.get('backend', '?')}, model={meta.get('model', '?')}, "
        f"store_seed={meta.get('store_seed', '?')}, "
        f"policies={meta.get('policies', '?')}"
    )
    summary = (
        f"Overall accuracy: {report.overall_accuracy_pct:.2f}% "
        f"({report.overall_correct}/{report.overall_n}); "
        f"mean latency {report.overall_mean_latency_s:.3f} s; "
        f"mean cost {format_cost(report.overall_mean_cost_microcents)} per answer; "
        f"backend errors: {report.backend_errors}"
    )

    if fmt == "markdown":
        lines = [f"# {header}", ""]
        headers = ["Tasks", "Cases", "Correct", "Accuracy",
                   "Mean Time (s)", "Mean Cost"]
        lines.append("| " + " | ".join(headers) + " |")
        lines.append("|" + "|".join(" --- " for _ in headers) + "|")
        for f in report.families:
            lines.append(
                f"| {f.display_name} | {f.n} | {f.correct} | "
                f"{f.accuracy_pct:.2f}% | {f.mean_latency_s:.3f} | "
                f"{format_cost(f.mean_cost_microcents)} |"
            )
        lines.append(
            f"| Average Time | {report.overall_n} | {report.overall_correct} | "
            f"{report.overall_accuracy_pct:.2f}% | "
            f"{report.overall_mean_latency_s:.3f} | "
            f"{format_cost(report.overall_mean_cost_microcents)} |"
        )
        lines += ["", summary, ""]
        lines += [f"> {line}" for line in REFERENCE_FOOTNOTES]
        return "\n".join(lines)

    lines = [header, ""]
    lines += _text_table(report)
    lines += ["", summary, ""]
    lines += list(REFERENCE_FOOTNOTES)
    return "\n".join(lines)
