"""Deterministic synthetic policy portfolio generator.

Stands in for the production policy database at desk scale. Generation is a
pure function of (seed, count): the same inputs always serialize to the same
bytes. Stores with at least DEMO_CLUSTER_SIZE policies start with a fixed
demonstration cluster of same-name auto policies so the search-refinement
dialogue has data to run against on any seed.
"""

from __future__ import annotations

import random
from datetime import date

from . import namedata
from .policy import (
    AUTO_TYPES,
    PREFIX_FOR_TYPE,
    Address,
    BillPlan,
    Claim,
    Coverage,
    Money,
    Policy,
    PolicyNumber,
    PolicyStore,
    PolicyType,
    SplitLimit,
    Vehicle,
    VIN_CHARS,
    add_months,
    bill_plan_schedule,
)

# Serials at or above this are reserved for planted records.
RESERVED_SERIAL_FLOOR = 9_000_000

DEMO_CLUSTER_SIZE = 7
DEMO_NAME = "John Sullivan"
# The disambiguated demo policy: the one John Sullivan in Fall River.
DEMO_POLICY_NUMBER = "AUT9000007"

_DEMO_CITIES = [
    ("Boston", "MA", "02108"),
    ("Worcester", "MA", "01602"),
    ("Springfield", "MA", "01103"),
    ("Cambridge", "MA", "02139"),
    ("Lowell", "MA", "01852"),
    ("Quincy", "MA", "02169"),
    ("Fall River", "MA", "02721"),
]

_TYPE_WEIGHTS = [
    (PolicyType.PERSONAL_AUTO, 55),
    (PolicyType.HOMEOWNERS, 25),
    (PolicyType.COMMERCIAL_AUTO, 12),
    (PolicyType.UMBRELLA, 8),
]

_PLAN_WEIGHTS = [
    (BillPlan.FULL_PAY, 30),
    (BillPlan.TWO_PAY, 15),
    (BillPlan.FOUR_PAY, 20),
    (BillPlan.TWELVE_PAY, 35),
]

_PREMIUM_RANGES = {
    PolicyType.PERSONAL_AUTO: (60_000, 250_000),
    PolicyType.HOMEOWNERS: (80_000, 300_000),
    PolicyType.COMMERCIAL_AUTO: (150_000, 600_000),
    PolicyType.UMBRELLA: (20_000, 80_000),
}

_BI_LIMITS = [(2_500_000, 5_000_000), (5_000_000, 10_000_000), (10_000_000, 30_000_000)]
_PD_LIMITS = [2_500_000, 5_000_000, 10_000_000]
_DEDUCTIBLES = [25_000, 50_000, 100_000]
_DWELLING_LIMITS = [20_000_000, 35_000_000, 50_000_000, 60_000_000]
_LIABILITY_LIMITS = [10_000_000, 30_000_000, 50_000_000]
_UMBRELLA_LIMITS = [100_000_000, 200_000_000, 500_000_000]


def _weighted(rng: random.Random, table):
    values = [item[0] for item in table]
    weights = [item[-1] for item in table]
    return rng.choices(values, weights=weights, k=1)[0]


def _pick_city(rng: random.Random) -> tuple[str, str, str]:
    city = rng.choices(namedata.CITIES, weights=[c[3] for c in namedata.CITIES], k=1)[0]
    return city[0], city[1], city[2]


def _make_vin(rng: random.Random) -> str:
    return "".join(rng.choice(VIN_CHARS) for _ in range(17))


def _make_vehicles(rng: random.Random, count: int) -> tuple:
    vehicles = []
    vins = set()
    for _ in range(count):
        vin = _make_vin(rng)
        while vin in vins:
            vin = _make_vin(rng)
        vins.add(vin)
        make, model = rng.choice(namedata.VEHICLES)
        vehicles.append(Vehicle(vin=vin, year=rng.randrange(1998, 2026), make=make, model=model))
    return tuple(vehicles)


def _make_coverages(rng: random.Random, policy_type: PolicyType) -> tuple:
    coverages = []
    if policy_type in AUTO_TYPES:
        per_person, per_accident = rng.choice(_BI_LIMITS)
        coverages.append(Coverage("BI", SplitLimit(Money(per_person), Money(per_accident))))
        coverages.append(Coverage("PD", Money(rng.choice(_PD_LIMITS))))
        if rng.random() < 0.7:
            deductible = Money(rng.choice(_DEDUCTIBLES))
            coverages.append(Coverage("COMP", Money(rng.choice(_PD_LIMITS)), deductible))
            coverages.append(Coverage("COLL", Money(rng.choice(_PD_LIMITS)), deductible))
    elif policy_type is PolicyType.HOMEOWNERS:
        coverages.append(Coverage("DWELL", Money(rng.choice(_DWELLING_LIMITS))))
        coverages.append(Coverage("LIAB", Money(rng.choice(_LIABILITY_LIMITS))))
    else:
        coverages.append(Coverage("UMBR", Money(rng.choice(_UMBRELLA_LIMITS))))
    return tuple(coverages)


def _make_claims(rng: random.Random, next_claim_id) -> tuple:
    roll = rng.random()
    count = 2 if roll < 0.08 else 1 if roll < 0.30 else 0
    claims = []
    for _ in range(count):
        refs = tuple(
            rng.choice(namedata.CLAIM_DOC_REFS) for _ in range(rng.randrange(0, 3))
        )
        claims.append(
            Claim(
                claim_id=next_claim_id(),
                amount=Money(rng.randrange(25_000, 1_500_000)),
                description=rng.choice(namedata.CLAIM_DESCRIPTIONS),
                document_refs=refs,
            )
        )
    return tuple(claims)


def _pick_next_payment(rng: random.Random, policy_fields: dict) -> tuple[date, Money]:
    probe = Policy(
        **policy_fields,
        next_payment_date=policy_fields["effective_date"],
        next_payment_amount=Money(0),
    )
    schedule = bill_plan_schedule(probe)
    return schedule[rng.randrange(len(schedule))]


def _demo_cluster() -> list[Policy]:
    """Seven fixed same-name auto policies; exactly one is in Fall River."""
    policies = []
    for i, (city, state, zip_code) in enumerate(_DEMO_CITIES, start=1):
        number = PolicyNumber("AUT", RESERVED_SERIAL_FLOOR + i)
        is_fall_river = city == "Fall River"
        effective = date(2025, 3, 1)
        plan = BillPlan.TWELVE_PAY if is_fall_river else BillPlan.FOUR_PAY
        premium = Money(144_000 + i * 6_000)
        fields = dict(
            number=number,
            policy_type=PolicyType.PERSONAL_AUTO,
            named_insureds=(DEMO_NAME,),
            address=Address(street=f"{40 + i} Pleasant St", city=city, state=state, zip=zip_code),
            effective_date=effective,
            termination_date=date(2026, 3, 1),
            annual_premium=premium,
            bill_plan=plan,
            autopay_enrolled=i % 2 == 0,
            coverages=(
                Coverage("BI", SplitLimit(Money(5_000_000), Money(10_000_000))),
                Coverage("PD", Money(5_000_000)),
            ),
            vehicles=(
                Vehicle(
                    vin=f"1HGCM82633A00{4000 + i}",
                    year=2019 + (i % 5),
                    make="Honda",
                    model="Civic",
                ),
            ),
            claims=(),
        )
        probe = Policy(
            **fields, next_payment_date=effective, next_payment_amount=Money(0)
        )
        next_date, next_amount = bill_plan_schedule(probe)[1]
        policies.append(
            Policy(**fields, next_payment_date=next_date, next_payment_amount=next_amount)
        )
    return policies


def generate_portfolio(seed: int, count: int) -> PolicyStore:
    """Generate `count` policies deterministically from `seed`."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = random.Random(seed)
    store = PolicyStore(seed=seed)

    planted = _demo_cluster() if count >= DEMO_CLUSTER_SIZE else []
    for policy in planted:
        store.policies[policy.number] = policy

    remaining = count - len(planted)
    serials = rng.sample(range(1, RESERVED_SERIAL_FLOOR), remaining) if remaining else []

    claim_counter = [0]

    def next_claim_id() -> str:
        claim_counter[0] += 1
        return f"CLM{claim_counter[0]:08d}"

    for serial in serials:
        policy_type = _weighted(rng, _TYPE_WEIGHTS)
        number = PolicyNumber(PREFIX_FOR_TYPE[policy_type], serial)

        # The demo name stays exclusive to the planted cluster so the
        # narrowed search lands on exactly one policy.
        surname = _weighted(rng, namedata.SURNAMES)
        first = _weighted(rng, namedata.FIRST_NAMES)
        while planted and f"{first} {surname}" == DEMO_NAME:
            surname = _weighted(rng, namedata.SURNAMES)
            first = _weighted(rng, namedata.FIRST_NAMES)
        insureds = [f"{first} {surname}"]
        if rng.random() < 0.3:
            other = _weighted(rng, namedata.FIRST_NAMES)
            while other == first or (planted and f"{other} {surname}" == DEMO_NAME):
                other = _weighted(rng, namedata.FIRST_NAMES)
            insureds.append(f"{other} {surname}")

        city, state, zip_code = _pick_city(rng)
        street = f"{rng.randrange(1, 400)} {rng.choice(namedata.STREET_NAMES)}"

        effective = date.fromordinal(date(2024, 1, 1).toordinal() + rng.randrange(0, 730))
        termination = add_months(effective, 12)

        lo, hi = _PREMIUM_RANGES[policy_type]
        premium = Money(rng.randrange(lo, hi))

        fields = dict(
            number=number,
            policy_type=policy_type,
            named_insureds=tuple(insureds),
            address=Address(street=street, city=city, state=state, zip=zip_code),
            effective_date=effective,
            termination_date=termination,
            annual_premium=premium,
            bill_plan=_weighted(rng, _PLAN_WEIGHTS),
            autopay_enrolled=rng.random() < 0.55,
            coverages=_make_coverages(rng, policy_type),
            vehicles=_make_vehicles(rng, rng.randrange(1, 4))
            if policy_type in AUTO_TYPES
            else (),
            claims=_make_claims(rng, next_claim_id),
        )
        next_date, next_amount = _pick_next_payment(rng, fields)
        store.policies[number] = Policy(
            **fields, next_payment_date=next_date, next_payment_amount=next_amount
        )
    return store
