"""The three data tools the assistant can call, bound to a store and indexes.

Executors return JSON-serializable payloads designed for an LLM to read:
amounts carry both exact cents and a dollar display string, policies carry a
powerdesk deep-link placeholder, and search hits are enriched enough to be
quoted without a second lookup.
"""

from __future__ import annotations

from .docs import DocIndex, doc_search
from .policy import (
    STATES,
    Coverage,
    Money,
    Policy,
    PolicyStore,
    PolicyType,
    SplitLimit,
    get_policy_detail,
)
from .search import (
    DEFAULT_REFINE_THRESHOLD,
    OutcomeKind,
    PolicyIndex,
    SearchHit,
    policy_search,
)
from .toolkit import Toolbox, ToolParam, ToolSpec

POWERDESK_SCHEME = "powerdesk://policy/"

_TYPE_NAMES = tuple(t.value for t in PolicyType)


def money_payload(amount: Money) -> dict:
    return {"cents": amount.cents, "display": amount.format()}


def _limit_payload(limit: Money | SplitLimit) -> dict:
    if isinstance(limit, SplitLimit):
        return {
            "per_person": money_payload(limit.per_person),
            "per_accident": money_payload(limit.per_accident),
            "display": f"{limit.per_person.format()}/{limit.per_accident.format()}",
        }
    return money_payload(limit)


def _coverage_payload(coverage: Coverage) -> dict:
    payload = {"code": coverage.code, "limit": _limit_payload(coverage.limit)}
    if coverage.deductible is not None:
        payload["deductible"] = money_payload(coverage.deductible)
    return payload


def policy_payload(policy: Policy) -> dict:
    """Display-enriched detail payload for one policy."""
    number = str(policy.number)
    return {
        "number": number,
        "policy_type": policy.policy_type.value,
        "named_insureds": list(policy.named_insureds),
        "address": {
            "street": policy.address.street,
            "city": policy.address.city,
            "state": policy.address.state,
            "zip": policy.address.zip,
            "one_line": policy.address.one_line(),
        },
        "effective_date": policy.effective_date.isoformat(),
        "termination_date": policy.termination_date.isoformat(),
        "annual_premium": money_payload(policy.annual_premium),
        "bill_plan": policy.bill_plan.value,
        "bill_plan_display": policy.bill_plan.display_name,
        "installment_count": policy.bill_plan.installment_count,
        "autopay_enrolled": policy.autopay_enrolled,
        "next_payment_date": policy.next_payment_date.isoformat(),
        "next_payment_amount": money_payload(policy.next_payment_amount),
        "coverages": [_coverage_payload(c) for c in policy.coverages],
        "vehicles": [
            {
                "vin": v.vin,
                "year": v.year,
                "make": v.make,
                "model": v.model,
                "display": v.display(),
            }
            for v in policy.vehicles
        ],
        "claims": [
            {
                "claim_id": c.claim_id,
                "amount": money_payload(c.amount),
                "description": c.description,
                "document_refs": list(c.document_refs),
            }
            for c in policy.claims
        ],
        "powerdesk_link": f"{POWERDESK_SCHEME}{number}",
    }


def hit_payload(store: PolicyStore, hit: SearchHit) -> dict:
    policy = store.get(hit.number)
    return {
        "number": hit.number,
        "policy_type": policy.policy_type.value,
        "named_insureds": list(policy.named_insureds),
        "city": policy.address.city,
        "state": policy.address.state,
        "address_line": policy.address.one_line(),
        "score": hit.score,
    }


def _check_state(state) -> str | None:
    if state in (None, "", "ALL"):
        return None if state in (None, "") else "ALL"
    if state not in STATES:
        raise ValueError(f"state must be one of {', '.join(STATES)}, or ALL")
    return state


def _check_policy_type(policy_type) -> str | None:
    if policy_type in (None, "", "ALL"):
        return None if policy_type in (None, "") else "ALL"
    if policy_type not in _TYPE_NAMES:
        raise ValueError(
            f"policy_type must be one of {', '.join(_TYPE_NAMES)}, or ALL"
        )
    return policy_type


POLICY_DETAIL_SPEC = ToolSpec(
    name="policy_detail",
    description=(
        "Fetch the full record for one insurance policy by its policy number "
        "(three-letter line prefix plus seven digits, e.g. AUT0000001): named "
        "insureds, address, term dates, premium, bill plan, AutoPay "
        "enrollment, next payment, coverages, vehicles, and claims."
    ),
    parameters=(
        ToolParam("number", "string", True,
                  "Policy number, e.g. AUT0000001."),
    ),
)

POLICY_SEARCH_SPEC = ToolSpec(
    name="policy_search",
    description=(
        "Search policies by policyholder name and/or address words. All "
        "query words must match. Returns up to five ranked candidates; when "
        "more match, it reports only the count so you can ask the user for "
        "a narrowing detail such as a city or street."
    ),
    parameters=(
        ToolParam("query", "string", True,
                  "Name and/or address words, e.g. 'John Sullivan Fall River'."),
        ToolParam("state", "string", False,
                  "Optional state filter: MA, ME, NH, or ALL."),
        ToolParam("policy_type", "string", False,
                  "Optional line filter: PersonalAuto, Homeowners, "
                  "CommercialAuto, Umbrella, or ALL."),
    ),
)

DOCUMENTATION_SEARCH_SPEC = ToolSpec(
    name="documentation_search",
    description=(
        "Full-text search over underwriting and product documentation. "
        "Returns the best-matching passages with their source document, "
        "optionally restricted to a state and policy type."
    ),
    parameters=(
        ToolParam("query", "string", True, "Words to search for."),
        ToolParam("state", "string", False,
                  "Optional state filter: MA, ME, NH, or ALL."),
        ToolParam("policy_type", "string", False,
                  "Optional line filter: PersonalAuto, Homeowners, "
                  "CommercialAuto, Umbrella, or ALL."),
    ),
)


def build_toolbox(
    store: PolicyStore,
    policy_index: PolicyIndex,
    doc_index: DocIndex,
    refine_threshold: int = DEFAULT_REFINE_THRESHOLD,
) -> Toolbox:
    """Register policy_detail, policy_search, and documentation_search."""

    def run_policy_detail(arguments: dict):
        policy = get_policy_detail(store, arguments["number"])
        return policy_payload(policy)

    def run_policy_search(arguments: dict):
        state = _check_state(arguments.get("state"))
        policy_type = _check_policy_type(arguments.get("policy_type"))
        outcome = policy_search(
            policy_index,
            arguments["query"],
            state_filter=None if state == "ALL" else state,
            type_filter=None if policy_type == "ALL" else policy_type,
            refine_threshold=refine_threshold,
        )
        if outcome.kind is OutcomeKind.NEEDS_REFINEMENT:
            return {
                "kind": "needs_refinement",
                "total": outcome.total_matches,
                "threshold": refine_threshold,
            }
        return {
            "kind": "hits",
            "total": outcome.total_matches,
            "hits": [hit_payload(store, h) for h in outcome.hits],
        }

    def run_documentation_search(arguments: dict):
        state = _check_state(arguments.get("state"))
        policy_type = _check_policy_type(arguments.get("policy_type"))
        scored = doc_search(
            doc_index,
            arguments["query"],
            state=None if state == "ALL" else state,
            policy_type=None if policy_type == "ALL" else policy_type,
        )
        return {
            "chunks": [
                {
                    "chunk_id": chunk.chunk_id,
                    "source_doc": chunk.source_doc,
                    "state": chunk.state,
                    "policy_type": chunk.policy_type,
                    "score": round(score, 6),
                    "text": chunk.body,
                }
                for chunk, score in scored
            ]
        }

    toolbox = Toolbox()
    toolbox.register(POLICY_DETAIL_SPEC, run_policy_detail)
    toolbox.register(POLICY_SEARCH_SPEC, run_policy_search)
    toolbox.register(DOCUMENTATION_SEARCH_SPEC, run_documentation_search)
    return toolbox
