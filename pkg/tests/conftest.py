from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fuzzydfs.fuzzy import TriangularFuzzyNumber

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (title, passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(num: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[num] = (title, bool(passed), detail)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}")


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def tfns(draw, lo=-10.0, hi=10.0):
    a, b, c = sorted(draw(st.floats(min_value=lo, max_value=hi, allow_nan=False)) for _ in range(3))
    return TriangularFuzzyNumber(a, b, c)


@st.composite
def matrices(draw, n, lo=-1.0, hi=1.0):
    vals = draw(st.lists(st.floats(min_value=lo, max_value=hi, allow_nan=False), min_size=n * n, max_size=n * n))
    return np.array(vals).reshape(n, n)


@st.composite
def adjacency(draw, p, weights=(0.0, 1.0, 2.0)):
    """Random weighted digraph adjacency with zero diagonal."""
    g = np.array(draw(st.lists(st.sampled_from(weights), min_size=p * p, max_size=p * p)), dtype=float).reshape(p, p)
    np.fill_diagonal(g, 0.0)
    return g
