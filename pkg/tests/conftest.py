import os

import pytest
from hypothesis import HealthCheck, settings

from bfree import family_from_ideals, make_order, principal_ideal

settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def Z():
    return make_order([0, 1])


@pytest.fixture(scope="session")
def G():
    # Z[i] is the maximal order of Q(i)
    return make_order([1, 0, 1], maximal=True)


def zfam(Z, *gens):
    return family_from_ideals([principal_ideal(Z.element(g)) for g in gens])


@pytest.fixture(scope="session")
def fam49(Z):
    return zfam(Z, 4, 9)
