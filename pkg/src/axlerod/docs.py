"""Documentation chunking and BM25 retrieval with state/type filtering.

Corpus files are plain UTF-8 text with a one-line header naming the state
and policy type the document applies to ("ALL" is a wildcard on either
axis). Documents split on blank-line paragraph boundaries into chunks of at
most MAX_CHUNK_CHARS characters.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .policy import PolicyType
from .search import EmptyQueryError, tokenize

MAX_CHUNK_CHARS = 2_000

BM25_K1 = 1.2
BM25_B = 0.75

_HEADER_RE = re.compile(
    r"^state=(?P<state>MA|ME|NH|ALL)\s+type="
    r"(?P<type>PersonalAuto|Homeowners|CommercialAuto|Umbrella|ALL)\s*$"
)


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class DocChunk:
    chunk_id: str
    source_doc: str
    state: str  # two-letter code or ALL
    policy_type: str  # policy-type name or ALL
    body: str

    def __post_init__(self):
        if not self.body:
            raise ValueError("chunk body must be non-empty")
        if len(self.body) > MAX_CHUNK_CHARS:
            raise ValueError("chunk body exceeds size cap")


def _paragraphs(text: str) -> list[str]:
    return [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]


def _split_oversized(paragraph: str) -> list[str]:
    """Split a paragraph that alone exceeds the cap, preferring word breaks."""
    pieces = []
    rest = paragraph
    while len(rest) > MAX_CHUNK_CHARS:
        cut = rest.rfind(" ", 0, MAX_CHUNK_CHARS + 1)
        if cut <= 0:
            cut = MAX_CHUNK_CHARS
        pieces.append(rest[:cut].rstrip())
        rest = rest[cut:].lstrip()
    if rest:
        pieces.append(rest)
    return pieces


def chunk_documents(corpus: list[tuple[str, str, str, str]]) -> list[DocChunk]:
    """Pack paragraphs greedily into chunks of at most MAX_CHUNK_CHARS.

    `corpus` entries are (doc name, state, policy_type, text). Chunk ids are
    "{doc}#{ordinal}". No text is lost: the concatenated chunk bodies carry
    every non-whitespace character of the source.
    """
    chunks: list[DocChunk] = []
    for doc_name, state, policy_type, text in corpus:
        paragraphs: list[str] = []
        for paragraph in _paragraphs(text):
            if len(paragraph) > MAX_CHUNK_CHARS:
                paragraphs.extend(_split_oversized(paragraph))
            else:
                paragraphs.append(paragraph)
        ordinal = 0
        current: list[str] = []
        current_len = 0
        for paragraph in paragraphs:
            added = len(paragraph) if not current else current_len + 2 + len(paragraph)
            if current and added > MAX_CHUNK_CHARS:
                chunks.append(
                    DocChunk(f"{doc_name}#{ordinal}", doc_name, state, policy_type,
                             "\n\n".join(current))
                )
                ordinal += 1
                current = [paragraph]
                current_len = len(paragraph)
            else:
                current.append(paragraph)
                current_len = added
        if current:
            chunks.append(
                DocChunk(f"{doc_name}#{ordinal}", doc_name, state, policy_type,
                         "\n\n".join(current))
            )
    return chunks


@dataclass
class DocIndex:
    """Chunk list plus the term statistics BM25 needs."""

    chunks: list[DocChunk] = field(default_factory=list)
    doc_frequency: dict[str, int] = field(default_factory=dict)
    term_frequencies: list[Counter] = field(default_factory=list)
    chunk_lengths: list[int] = field(default_factory=list)
    avg_chunk_length: float = 0.0

    def __len__(self) -> int:
        return len(self.chunks)


def build_doc_index(chunks: list[DocChunk]) -> DocIndex:
    index = DocIndex(chunks=list(chunks))
    for chunk in index.chunks:
        tokens = tokenize(chunk.body)
        tf = Counter(tokens)
        index.term_frequencies.append(tf)
        index.chunk_lengths.append(len(tokens))
        for term in tf:
            index.doc_frequency[term] = index.doc_frequency.get(term, 0) + 1
    if index.chunks:
        index.avg_chunk_length = sum(index.chunk_lengths) / len(index.chunks)
    return index


def _idf(n_chunks: int, df: int) -> float:
    # non-negative variant: ln(1 + (N - df + 0.5) / (df + 0.5))
    return math.log(1.0 + (n_chunks - df + 0.5) / (df + 0.5))


def _chunk_eligible(chunk: DocChunk, state: str | None, policy_type: str | None) -> bool:
    if state is not None and chunk.state not in (state, "ALL"):
        return False
    if policy_type is not None and chunk.policy_type not in (policy_type, "ALL"):
        return False
    return True


def doc_search(
    index: DocIndex,
    query: str,
    state: str | None = None,
    policy_type: str | PolicyType | None = None,
    k: int = 5,
) -> list[tuple[DocChunk, float]]:
    """BM25-ranked top-k chunks among those passing the state/type filters.

    Ties break by ascending chunk_id; chunks scoring zero are not returned.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    tokens = tokenize(query)
    if not tokens:
        raise EmptyQueryError("query has no searchable tokens")
    if isinstance(policy_type, PolicyType):
        policy_type = policy_type.value

    n = len(index.chunks)
    scored = []
    for i, chunk in enumerate(index.chunks):
        if not _chunk_eligible(chunk, state, policy_type):
            continue
        tf = index.term_frequencies[i]
        length_norm = BM25_K1 * (
            1 - BM25_B + BM25_B * index.chunk_lengths[i] / index.avg_chunk_length
        )
        score = 0.0
        for token in tokens:
            f = tf.get(token, 0)
            if f == 0:
                continue
            score += _idf(n, index.doc_frequency[token]) * f * (BM25_K1 + 1) / (f + length_norm)
        if score > 0.0:
            scored.append((chunk, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0].chunk_id))
    return scored[:k]


def brute_force_doc_scores(
    chunks: list[DocChunk],
    query: str,
    state: str | None = None,
    policy_type: str | PolicyType | None = None,
) -> dict[str, float]:
    """Reference BM25 computed directly from chunk bodies; shares no index
    structures or filter helpers with doc_search."""
    if isinstance(policy_type, PolicyType):
        policy_type = policy_type.value
    tokens = tokenize(query)
    n = len(chunks)
    all_token_lists = [tokenize(c.body) for c in chunks]
    avgdl = sum(len(t) for t in all_token_lists) / n if n else 0.0
    df: dict[str, int] = {}
    for token_list in all_token_lists:
        for token in set(token_list):
            df[token] = df.get(token, 0) + 1
    scores: dict[str, float] = {}
    for chunk, chunk_tokens in zip(chunks, all_token_lists):
        if state is not None and chunk.state != state and chunk.state != "ALL":
            continue
        if policy_type is not None and chunk.policy_type != policy_type and chunk.policy_type != "ALL":
            continue
        score = 0.0
        for token in tokens:
            f = chunk_tokens.count(token)
            if f == 0:
                continue
            idf = math.log(1.0 + (n - df[token] + 0.5) / (df[token] + 0.5))
            score += idf * f * (BM25_K1 + 1) / (
                f + BM25_K1 * (1 - BM25_B + BM25_B * len(chunk_tokens) / avgdl)
            )
        if score > 0.0:
            scores[chunk.chunk_id] = score
    return scores


def load_corpus_dir(path: str | Path) -> list[tuple[str, str, str, str]]:
    """Read a docs directory into (doc name, state, type, body) tuples.

    Each file's first line must be `state=<XX|ALL> type=<PolicyType|ALL>`.
    """
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"docs directory not found: {root}")
    corpus = []
    for file in sorted(root.glob("*.txt")):
        text = file.read_text(encoding="utf-8")
        first_line, _, body = text.partition("\n")
        m = _HEADER_RE.match(first_line.strip())
        if m is None:
            raise CorpusError(f"{file.name}: first line must declare state= and type=")
        corpus.append((file.stem, m.group("state"), m.group("type"), body))
    return corpus
