from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from phasemaj.polyexp import Poly, PolyExpFn

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE_LINES = []

rationals = st.fractions(max_denominator=50).filter(lambda f: abs(f) <= 20)


@st.composite
def polys(draw, max_degree=10):
    coeffs = draw(st.lists(rationals, max_size=max_degree + 1))
    return Poly(tuple(coeffs))


@st.composite
def polyexps(draw, max_degree=10):
    return PolyExpFn(draw(rationals), draw(polys(max_degree)))


@pytest.fixture
def half():
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
