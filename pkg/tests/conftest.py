import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from carnot_mehler import Polynomial, get_group

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GROUPS = ["h1", "h2", "free2-3", "engel", "free3-2", "r2"]

ACCEPTANCE_LINES: list[str] = []


def rationals(bound: int = 5, denom: int = 6):
    return st.fractions(min_value=-bound, max_value=bound, max_denominator=denom)


def polynomials(alg, max_degree: int = 3, max_terms: int = 5):
    """Hypothesis strategy for exact real polynomials on ``alg``."""
    ring = alg.ring
    exps = [e for d in range(max_degree + 1) for e in ring.exponents_of_degree(d)]
    return st.dictionaries(st.sampled_from(exps), rationals(), max_size=max_terms).map(
        lambda terms: Polynomial(ring, terms))


def points(alg):
    return st.tuples(*[rationals() for _ in range(alg.dim)])


@pytest.fixture(scope="session")
def h1():
    return get_group("h1")


@pytest.fixture(params=GROUPS)
def group(request):
    return get_group(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
