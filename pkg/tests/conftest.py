import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LEVELS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


@pytest.fixture
def levels():
    return LEVELS.copy()


@st.composite
def distributions(draw, n=4, min_weight=1e-3):
    """Strictly positive distributions with components bounded away from zero."""
    w = draw(st.lists(st.floats(min_weight, 1.0), min_size=n, max_size=n))
    w = np.array(w)
    return w / w.sum()


@st.composite
def masked_distributions(draw, n=4):
    """Distributions with at least one exact zero and at least two occupied levels."""
    p = draw(distributions(n))
    zeros = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 2))
    p[list(zeros)] = 0.0
    return p / p.sum()


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
