"""Insurance policy data model and the line-delimited store format.

All money is integer cents; all monetary arithmetic stays in integers.
A store serializes to UTF-8 JSON lines: a header object followed by one
policy object per line, keys in a fixed order so equal stores produce
byte-identical files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum

STORE_FORMAT = "axlerod-store"
STORE_VERSION = 1

LINE_PREFIXES = ("AUT", "HOM", "CAU", "UMB")
STATES = ("MA", "ME", "NH")

# VIN alphabet: alphanumeric with I, O, Q excluded.
VIN_CHARS = "ABCDEFGHJKLMNPRSTUVWXYZ0123456789"

_NUMBER_RE = re.compile(r"^(AUT|HOM|CAU|UMB)(\d{7})$")
_VIN_RE = re.compile(r"^[A-HJ-NPR-Z0-9]{17}$")


class PolicyDomainError(Exception):
    """Base class for policy-domain failures."""


class InvalidNumberError(PolicyDomainError):
    """Raised when a policy number fails the format check."""


class PolicyNotFoundError(PolicyDomainError):
    """Raised when a syntactically valid policy number is not in the store."""


class StoreParseError(PolicyDomainError):
    """Raised on malformed store input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class PolicyType(str, Enum):
    PERSONAL_AUTO = "PersonalAuto"
    HOMEOWNERS = "Homeowners"
    COMMERCIAL_AUTO = "CommercialAuto"
    UMBRELLA = "Umbrella"


# Line-of-business prefix <-> policy type.
PREFIX_FOR_TYPE = {
    PolicyType.PERSONAL_AUTO: "AUT",
    PolicyType.HOMEOWNERS: "HOM",
    PolicyType.COMMERCIAL_AUTO: "CAU",
    PolicyType.UMBRELLA: "UMB",
}
TYPE_FOR_PREFIX = {v: k for k, v in PREFIX_FOR_TYPE.items()}

AUTO_TYPES = (PolicyType.PERSONAL_AUTO, PolicyType.COMMERCIAL_AUTO)


class BillPlan(str, Enum):
    FULL_PAY = "FullPay"
    TWO_PAY = "TwoPay"
    FOUR_PAY = "FourPay"
    TWELVE_PAY = "TwelvePay"

    @property
    def installment_count(self) -> int:
        return _INSTALLMENTS[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]


_INSTALLMENTS = {
    BillPlan.FULL_PAY: 1,
    BillPlan.TWO_PAY: 2,
    BillPlan.FOUR_PAY: 4,
    BillPlan.TWELVE_PAY: 12,
}
_DISPLAY = {
    BillPlan.FULL_PAY: "Full-Pay",
    BillPlan.TWO_PAY: "2-Pay",
    BillPlan.FOUR_PAY: "4-Pay",
    BillPlan.TWELVE_PAY: "12-Pay",
}


@dataclass(frozen=True, order=True)
class Money:
    """A non-negative amount of exact integer cents."""

    cents: int

    def __post_init__(self):
        if not isinstance(self.cents, int) or isinstance(self.cents, bool):
            raise ValueError("cents must be an int")
        if self.cents < 0:
            raise ValueError("cents must be non-negative")

    def __add__(self, other: "Money") -> "Money":
        return Money(self.cents + other.cents)

    def format(self) -> str:
        """Render as dollars, e.g. $1,234.56."""
        return f"${self.cents // 100:,}.{self.cents % 100:02d}"


@dataclass(frozen=True, order=True)
class PolicyNumber:
    """Line-of-business prefix plus a zero-padded 7-digit serial."""

    line_prefix: str
    serial: int

    def __post_init__(self):
        if self.line_prefix not in LINE_PREFIXES:
            raise InvalidNumberError(f"unknown line prefix {self.line_prefix!r}")
        if not 0 <= self.serial <= 9_999_999:
            raise InvalidNumberError(f"serial {self.serial} out of range")

    def __str__(self) -> str:
        return f"{self.line_prefix}{self.serial:07d}"

    @classmethod
    def parse(cls, text: str) -> "PolicyNumber":
        m = _NUMBER_RE.match(text)
        if m is None:
            raise InvalidNumberError(f"malformed policy number {text!r}")
        return cls(m.group(1), int(m.group(2)))

    @classmethod
    def is_valid(cls, text: str) -> bool:
        return _NUMBER_RE.match(text) is not None


@dataclass(frozen=True)
class Address:
    street: str
    city: str
    state: str
    zip: str

    def __post_init__(self):
        if self.state not in STATES:
            raise ValueError(f"state {self.state!r} outside service area")
        if not re.match(r"^\d{5}$", self.zip):
            raise ValueError(f"zip {self.zip!r} must be 5 digits")

    def one_line(self) -> str:
        return f"{self.street}, {self.city}, {self.state} {self.zip}"


@dataclass(frozen=True)
class SplitLimit:
    """Per-person / per-accident limit pair (e.g. bodily injury)."""

    per_person: Money
    per_accident: Money


# Coverage codes that carry a deductible.
DEDUCTIBLE_CODES = ("COMP", "COLL")


@dataclass(frozen=True)
class Coverage:
    code: str
    limit: Money | SplitLimit
    deductible: Money | None = None

    def __post_init__(self):
        if isinstance(self.limit, Money):
            if self.limit.cents <= 0:
                raise ValueError("coverage limit must be positive")
        else:
            if self.limit.per_person.cents <= 0 or self.limit.per_accident.cents <= 0:
                raise ValueError("coverage limit must be positive")
        if self.deductible is not None and self.code not in DEDUCTIBLE_CODES:
            raise ValueError(f"deductible not allowed for coverage {self.code}")


@dataclass(frozen=True)
class Vehicle:
    vin: str
    year: int
    make: str
    model: str

    def __post_init__(self):
        if not _VIN_RE.match(self.vin):
            raise ValueError(f"invalid VIN {self.vin!r}")
        if not 1990 <= self.year <= 2026:
            raise ValueError(f"vehicle year {self.year} out of range")

    def display(self) -> str:
        return f"{self.year} {self.make} {self.model}"


@dataclass(frozen=True)
class Claim:
    claim_id: str
    amount: Money
    description: str
    document_refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Policy:
    number: PolicyNumber
    policy_type: PolicyType
    named_insureds: tuple[str, ...]
    address: Address
    effective_date: date
    termination_date: date
    annual_premium: Money
    bill_plan: BillPlan
    autopay_enrolled: bool
    next_payment_date: date
    next_payment_amount: Money
    coverages: tuple[Coverage, ...] = ()
    vehicles: tuple[Vehicle, ...] = ()
    claims: tuple[Claim, ...] = ()

    def __post_init__(self):
        if not self.named_insureds:
            raise ValueError("policy needs at least one named insured")
        if self.effective_date >= self.termination_date:
            raise ValueError("effective_date must precede termination_date")
        if not self.effective_date <= self.next_payment_date <= self.termination_date:
            raise ValueError("next_payment_date outside policy term")
        is_auto = self.policy_type in AUTO_TYPES
        if is_auto and not self.vehicles:
            raise ValueError("auto policy must list vehicles")
        if not is_auto and self.vehicles:
            raise ValueError("non-auto policy must not list vehicles")
        if PREFIX_FOR_TYPE[self.policy_type] != self.number.line_prefix:
            raise ValueError("policy number prefix does not match policy type")
        vins = [v.vin for v in self.vehicles]
        if len(set(vins)) != len(vins):
            raise ValueError("duplicate VIN within policy")


@dataclass
class PolicyStore:
    """Immutable-after-load map of policy number to policy."""

    policies: dict[PolicyNumber, Policy] = field(default_factory=dict)
    seed: int = 0

    def __len__(self) -> int:
        return len(self.policies)

    def get(self, number: PolicyNumber | str) -> Policy:
        """Look up the full record for a policy number.

        Raises InvalidNumberError on a malformed number and
        PolicyNotFoundError when the number is absent.
        """
        if isinstance(number, str):
            number = PolicyNumber.parse(number)
        policy = self.policies.get(number)
        if policy is None:
            raise PolicyNotFoundError(f"no policy {number}")
        return policy

    def sorted_policies(self) -> list[Policy]:
        return [self.policies[k] for k in sorted(self.policies, key=str)]


def get_policy_detail(store: PolicyStore, number: PolicyNumber | str) -> Policy:
    return store.get(number)


def add_months(start: date, months: int) -> date:
    """Calendar-month step with end-of-month clamping."""
    month_index = start.month - 1 + months
    year = start.year + month_index // 12
    month = month_index % 12 + 1
    # clamp day to the target month's length
    if month == 12:
        next_first = date(year + 1, 1, 1)
    else:
        next_first = date(year, month + 1, 1)
    last_day = (next_first - next_first.resolution).day
    return date(year, month, min(start.day, last_day))


def bill_plan_schedule(policy: Policy) -> list[tuple[date, Money]]:
    """Installment dates and amounts for a policy's bill plan.

    Amounts always sum exactly to the annual premium; the integer-division
    remainder is loaded onto the first installment. Dates step monthly from
    the effective date.
    """
    n = policy.bill_plan.installment_count
    total = policy.annual_premium.cents
    base = total // n
    remainder = total % n
    schedule = []
    for i in range(n):
        amount = base + remainder if i == 0 else base
        schedule.append((add_months(policy.effective_date, i), Money(amount)))
    return schedule


# --- serialization -----------------------------------------------------------

def _limit_to_json(limit: Money | SplitLimit):
    if isinstance(limit, Money):
        return limit.cents
    return {"per_person": limit.per_person.cents, "per_accident": limit.per_accident.cents}


def _limit_from_json(value) -> Money | SplitLimit:
    if isinstance(value, int):
        return Money(value)
    return SplitLimit(Money(value["per_person"]), Money(value["per_accident"]))


def policy_to_dict(policy: Policy) -> dict:
    """JSON-ready dict with keys in the canonical field order."""
    return {
        "number": str(policy.number),
        "policy_type": policy.policy_type.value,
        "named_insureds": list(policy.named_insureds),
        "address": {
            "street": policy.address.street,
            "city": policy.address.city,
            "state": policy.address.state,
            "zip": policy.address.zip,
        },
        "effective_date": policy.effective_date.isoformat(),
        "termination_date": policy.termination_date.isoformat(),
        "annual_premium": policy.annual_premium.cents,
        "bill_plan": policy.bill_plan.value,
        "autopay_enrolled": policy.autopay_enrolled,
        "next_payment_date": policy.next_payment_date.isoformat(),
        "next_payment_amount": policy.next_payment_amount.cents,
        "coverages": [
            {
                "code": c.code,
                "limit": _limit_to_json(c.limit),
                **({"deductible": c.deductible.cents} if c.deductible is not None else {}),
            }
            for c in policy.coverages
        ],
        "vehicles": [
            {"vin": v.vin, "year": v.year, "make": v.make, "model": v.model}
            for v in policy.vehicles
        ],
        "claims": [
            {
                "claim_id": cl.claim_id,
                "amount": cl.amount.cents,
                "description": cl.description,
                "document_refs": list(cl.document_refs),
            }
            for cl in policy.claims
        ],
    }


def policy_from_dict(obj: dict) -> Policy:
    return Policy(
        number=PolicyNumber.parse(obj["number"]),
        policy_type=PolicyType(obj["policy_type"]),
        named_insureds=tuple(obj["named_insureds"]),
        address=Address(**obj["address"]),
        effective_date=date.fromisoformat(obj["effective_date"]),
        termination_date=date.fromisoformat(obj["termination_date"]),
        annual_premium=Money(obj["annual_premium"]),
        bill_plan=BillPlan(obj["bill_plan"]),
        autopay_enrolled=obj["autopay_enrolled"],
        next_payment_date=date.fromisoformat(obj["next_payment_date"]),
        next_payment_amount=Money(obj["next_payment_amount"]),
        coverages=tuple(
            Coverage(
                code=c["code"],
                limit=_limit_from_json(c["limit"]),
                deductible=Money(c["deductible"]) if "deductible" in c else None,
            )
            for c in obj["coverages"]
        ),
        vehicles=tuple(Vehicle(**v) for v in obj["vehicles"]),
        claims=tuple(
            Claim(
                claim_id=cl["claim_id"],
                amount=Money(cl["amount"]),
                description=cl["description"],
                document_refs=tuple(cl["document_refs"]),
            )
            for cl in obj["claims"]
        ),
    )


def serialize_store(store: PolicyStore) -> bytes:
    """One JSON object per line: header first, then policies sorted by number."""
    header = {
        "format": STORE_FORMAT,
        "version": STORE_VERSION,
        "seed": store.seed,
        "count": len(store.policies),
    }
    lines = [json.dumps(header, separators=(",", ":"), ensure_ascii=False)]
    for policy in store.sorted_policies():
        lines.append(json.dumps(policy_to_dict(policy), separators=(",", ":"), ensure_ascii=False))
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_store(data: bytes) -> PolicyStore:
    text = data.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        return PolicyStore()
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise StoreParseError(1, f"bad header: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("format") != STORE_FORMAT:
        raise StoreParseError(1, "not an axlerod-store header")
    if header.get("version") != STORE_VERSION:
        raise StoreParseError(1, f"unsupported version {header.get('version')!r}")
    store = PolicyStore(seed=int(header.get("seed", 0)))
    for idx, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            policy = policy_from_dict(obj)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, InvalidNumberError) as exc:
            raise StoreParseError(idx, f"bad policy record: {exc}") from exc
        if policy.number in store.policies:
            raise StoreParseError(idx, f"duplicate policy number {policy.number}")
        store.policies[policy.number] = policy
    declared = header.get("count")
    if declared is not None and declared != len(store.policies):
        raise StoreParseError(
            len(lines), f"header declares {declared} policies, file has {len(store.policies)}"
        )
    return store


def load_store(path) -> PolicyStore:
    with open(path, "rb") as fh:
        return deserialize_store(fh.read())


def save_store(store: PolicyStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_store(store))
