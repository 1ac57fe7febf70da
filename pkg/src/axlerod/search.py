"""Indexed search over policyholder names and addresses.

A query matches a policy when every query token appears in at least one
indexed field of that policy (AND semantics). Name-field matches score double
address-field matches. When more candidates match than the refinement
threshold allows, the caller gets a NeedsRefinement outcome instead of hits,
so the conversation layer can ask for narrowing detail.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .policy import Policy, PolicyStore, PolicyType

DEFAULT_REFINE_THRESHOLD = 5

NAME_FIELD = "name"
STREET_FIELD = "street"
CITY_FIELD = "city"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class SearchError(Exception):
    pass


class EmptyQueryError(SearchError):
    """No tokens survive tokenization."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SearchHit:
    number: str
    score: int
    matched_fields: frozenset[str]


class OutcomeKind(str, Enum):
    HITS = "hits"
    NEEDS_REFINEMENT = "needs_refinement"


@dataclass(frozen=True)
class SearchOutcome:
    kind: OutcomeKind
    hits: tuple[SearchHit, ...] = ()
    total_matches: int = 0

    @classmethod
    def of_hits(cls, hits) -> "SearchOutcome":
        return cls(kind=OutcomeKind.HITS, hits=tuple(hits), total_matches=len(hits))

    @classmethod
    def needs_refinement(cls, total: int) -> "SearchOutcome":
        return cls(kind=OutcomeKind.NEEDS_REFINEMENT, total_matches=total)


@dataclass
class PolicyIndex:
    """Inverted index: token -> {(policy number, field tag)}."""

    postings: dict[str, set[tuple[str, str]]] = field(default_factory=dict)
    attributes: dict[str, tuple[str, str]] = field(default_factory=dict)  # number -> (state, type)
    doc_count: int = 0

    def _post(self, token: str, number: str, tag: str) -> None:
        self.postings.setdefault(token, set()).add((number, tag))

    def serialized(self) -> str:
        """Canonical text form, used to compare index builds."""
        lines = []
        for token in sorted(self.postings):
            entries = ",".join(f"{n}/{t}" for n, t in sorted(self.postings[token]))
            lines.append(f"{token}:{entries}")
        return "\n".join(lines)


def build_policy_index(store: PolicyStore) -> PolicyIndex:
    """Index every token of every insured name, street, and city."""
    index = PolicyIndex(doc_count=len(store))
    for policy in store.sorted_policies():
        number = str(policy.number)
        index.attributes[number] = (policy.address.state, policy.policy_type.value)
        for insured in policy.named_insureds:
            for token in tokenize(insured):
                index._post(token, number, NAME_FIELD)
        for token in tokenize(policy.address.street):
            index._post(token, number, STREET_FIELD)
        for token in tokenize(policy.address.city):
            index._post(token, number, CITY_FIELD)
    return index


def score_fields(matched: dict[str, set[str]]) -> int:
    """2 points per token matched in a name field, 1 per token matched in an
    address field; a token matching both kinds earns both."""
    score = 0
    for tags in matched.values():
        if NAME_FIELD in tags:
            score += 2
        if STREET_FIELD in tags or CITY_FIELD in tags:
            score += 1
    return score


def policy_search(
    index: PolicyIndex,
    query: str,
    state_filter: str | None = None,
    type_filter: str | PolicyType | None = None,
    refine_threshold: int = DEFAULT_REFINE_THRESHOLD,
) -> SearchOutcome:
    """AND-match all query tokens against indexed fields, rank, and cap.

    More than `refine_threshold` candidates yields NeedsRefinement with the
    exact candidate count; otherwise hits sorted by descending score, ties
    broken by ascending policy number.
    """
    tokens = tokenize(query)
    if not tokens:
        raise EmptyQueryError("query has no searchable tokens")
    if isinstance(type_filter, PolicyType):
        type_filter = type_filter.value

    # per-policy: token -> field tags matched
    matched: dict[str, dict[str, set[str]]] = {}
    for i, token in enumerate(set(tokens)):
        entries = index.postings.get(token, set())
        numbers_with_tags: dict[str, set[str]] = {}
        for number, tag in entries:
            numbers_with_tags.setdefault(number, set()).add(tag)
        if i == 0:
            for number, tags in numbers_with_tags.items():
                matched[number] = {token: tags}
        else:
            for number in list(matched):
                if number in numbers_with_tags:
                    matched[number][token] = numbers_with_tags[number]
                else:
                    del matched[number]
        if not matched:
            break

    candidates = []
    for number, token_tags in matched.items():
        state, ptype = index.attributes[number]
        if state_filter is not None and state != state_filter:
            continue
        if type_filter is not None and ptype != type_filter:
            continue
        all_tags = frozenset(tag for tags in token_tags.values() for tag in tags)
        candidates.append(SearchHit(number, score_fields(token_tags), all_tags))

    if len(candidates) > refine_threshold:
        return SearchOutcome.needs_refinement(len(candidates))
    candidates.sort(key=lambda h: (-h.score, h.number))
    return SearchOutcome.of_hits(candidates)


def linear_scan_search(
    store: PolicyStore,
    query: str,
    state_filter: str | None = None,
    type_filter: str | PolicyType | None = None,
    refine_threshold: int = DEFAULT_REFINE_THRESHOLD,
) -> SearchOutcome:
    """Brute-force reference implementation over the raw store.

    Applies the same token, filter, and scoring rules as policy_search
    without any index structure; used as the correctness oracle.
    """
    tokens = tokenize(query)
    if not tokens:
        raise EmptyQueryError("query has no searchable tokens")
    if isinstance(type_filter, PolicyType):
        type_filter = type_filter.value

    candidates = []
    for policy in store.sorted_policies():
        if state_filter is not None and policy.address.state != state_filter:
            continue
        if type_filter is not None and policy.policy_type.value != type_filter:
            continue
        fields_tokens = {
            NAME_FIELD: set(t for n in policy.named_insureds for t in tokenize(n)),
            STREET_FIELD: set(tokenize(policy.address.street)),
            CITY_FIELD: set(tokenize(policy.address.city)),
        }
        token_tags: dict[str, set[str]] = {}
        ok = True
        for token in set(tokens):
            tags = {tag for tag, toks in fields_tokens.items() if token in toks}
            if not tags:
                ok = False
                break
            token_tags[token] = tags
        if not ok:
            continue
        # scoring arithmetic duplicated on purpose: this path must not share
        # the scorer with the indexed implementation it checks
        score = 0
        for tags in token_tags.values():
            if NAME_FIELD in tags:
                score += 2
            if STREET_FIELD in tags or CITY_FIELD in tags:
                score += 1
        all_tags = frozenset(tag for tags in token_tags.values() for tag in tags)
        candidates.append(SearchHit(str(policy.number), score, all_tags))

    if len(candidates) > refine_threshold:
        return SearchOutcome.needs_refinement(len(candidates))
    candidates.sort(key=lambda h: (-h.score, h.number))
    return SearchOutcome.of_hits(candidates)
