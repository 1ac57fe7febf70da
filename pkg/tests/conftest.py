import hypothesis
import pytest

from axlerod.generate import generate_portfolio
from axlerod.runtime import ServiceConfig, build_runtime
from axlerod.search import build_policy_index

hypothesis.settings.register_profile("fast", max_examples=25)
hypothesis.settings.register_profile("thorough", max_examples=400)


@pytest.fixture(scope="session")
def small_store():
    # 120 policies keeps every per-test scan fast while still exercising
    # every policy type, state, and bill plan.
    return generate_portfolio(seed=7, count=120)


@pytest.fixture(scope="session")
def small_index(small_store):
    return build_policy_index(small_store)


@pytest.fixture(scope="session")
def oracle_runtime():
    # The canonical benchmark world: seed 42, 1000 policies, bundled docs.
    return build_runtime(ServiceConfig(seed=42, count=1000))


@pytest.fixture()
def runtime_small():
    return build_runtime(ServiceConfig(seed=11, count=60))
