"""Token usage and cost accounting.

Prices are integer cents per million tokens, so one token costs exactly that
many micro-cents (1e-6 cents). All arithmetic stays in integer micro-cents;
half-up rounding to cents (or to ten-thousandths of a dollar for display)
happens only at presentation.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .policy import Money

MICROCENTS_PER_CENT = 1_000_000


class CostingError(Exception):
    pass


class UnknownModelError(CostingError):
    pass


def count_tokens_fallback(text: str) -> int:
    """Ceiling of chars/4; used only when a backend omits a usage block."""
    return -(-len(text) // 4)


@dataclass(frozen=True)
class ModelPrice:
    input_per_mtok: Money
    output_per_mtok: Money

    def __post_init__(self):
        if self.input_per_mtok.cents < 0 or self.output_per_mtok.cents < 0:
            raise ValueError("prices must be non-negative")


@dataclass(frozen=True)
class PriceTable:
    models: dict

    def price_for(self, model: str) -> ModelPrice:
        entry = self.models.get(model)
        if entry is None:
            entry = self.models.get("*")  # optional catch-all row
        if entry is None:
            raise UnknownModelError(f"no price entry for model {model!r}")
        return entry

    @classmethod
    def from_dict(cls, obj: dict) -> "PriceTable":
        models = {
            name: ModelPrice(
                input_per_mtok=Money(int(entry["input_cents_per_mtok"])),
                output_per_mtok=Money(int(entry["output_cents_per_mtok"])),
            )
            for name, entry in obj["models"].items()
        }
        return cls(models=models)


def load_price_table(path: str | Path) -> PriceTable:
    with open(path, "r", encoding="utf-8") as handle:
        return PriceTable.from_dict(json.load(handle))


def default_price_table() -> PriceTable:
    return load_price_table(Path(__file__).parent / "data" / "prices.json")


def cost_microcents(prompt_tokens: int, completion_tokens: int,
                    table: PriceTable, model: str) -> int:
    """Exact turn cost in micro-cents.

    A price of N cents per million tokens makes each token worth exactly N
    micro-cents, so this is pure integer arithmetic.
    """
    if prompt_tokens < 0 or completion_tokens < 0:
        raise ValueError("token counts must be non-negative")
    price = table.price_for(model)
    return (prompt_tokens * price.input_per_mtok.cents
            + completion_tokens * price.output_per_mtok.cents)


def microcents_to_money(microcents: int) -> Money:
    """Half-up rounding to whole cents — presentation only."""
    if microcents < 0:
        raise ValueError("cost cannot be negative")
    return Money((microcents + MICROCENTS_PER_CENT // 2) // MICROCENTS_PER_CENT)


def format_cost(microcents: int) -> str:
    """Dollar display to a tenth of a cent's precision, e.g. '$0.0075'.

    A ten-thousandth of a dollar is 10,000 micro-cents; rounding is half-up
    at that digit.
    """
    if microcents < 0:
        raise ValueError("cost cannot be negative")
    ten_thousandths = (microcents + 5_000) // 10_000
    dollars, frac = divmod(ten_thousandths, 10_000)
    return f"${dollars:,}.{frac:04d}"


def estimate_cost(prompt_tokens: int, completion_tokens: int,
                  table: PriceTable, model: str) -> Money:
    return microcents_to_money(
        cost_microcents(prompt_tokens, completion_tokens, table, model)
    )


@dataclass
class LedgerEntry:
    session_id: str
    prompt_tokens: int
    completion_tokens: int
    cost_microcents: int
    estimated: bool


@dataclass
class LedgerTotals:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cost_microcents: int = 0
    entries: int = 0
    estimated_entries: int = 0

    def absorb(self, entry: LedgerEntry) -> None:
        self.prompt_tokens += entry.prompt_tokens
        self.completion_tokens += entry.completion_tokens
        self.cost_microcents += entry.cost_microcents
        self.entries += 1
        if entry.estimated:
            self.estimated_entries += 1


@dataclass
class UsageLedger:
    """Thread-safe accumulator of per-session and global usage totals."""

    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _entries: list = field(default_factory=list)
    _global: LedgerTotals = field(default_factory=LedgerTotals)
    _sessions: dict = field(default_factory=dict)

    def record(self, session_id: str, prompt_tokens: int, completion_tokens: int,
               cost_microcents: int, estimated: bool) -> LedgerEntry:
        entry = LedgerEntry(session_id, prompt_tokens, completion_tokens,
                            cost_microcents, estimated)
        with self._lock:
            self._entries.append(entry)
            self._global.absorb(entry)
            totals = self._sessions.setdefault(session_id, LedgerTotals())
            totals.absorb(entry)
        return entry

    def global_totals(self) -> LedgerTotals:
        with self._lock:
            return LedgerTotals(**vars(self._global))

    def session_totals(self, session_id: str) -> LedgerTotals:
        with self._lock:
            totals = self._sessions.get(session_id, LedgerTotals())
            return LedgerTotals(**vars(totals))

    def session_ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)

    def entries(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)
