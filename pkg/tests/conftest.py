from fractions import Fraction as F

import pytest
from hypothesis import strategies as st

from localcake.measure import ONE, ZERO, Piece, ValuationDensity

# Criterion lines collected by the acceptance suite, echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def density(bps, ws):
    return ValuationDensity([F(b) for b in bps], [F(w) for w in ws])


UNIFORM = ValuationDensity.uniform()


@pytest.fixture
def uniform():
    return UNIFORM


grid = st.integers(min_value=2, max_value=24)


@st.composite
def densities(draw, max_cells=6):
    q = draw(grid)
    k = draw(st.integers(1, min(max_cells, q)))
    cuts = sorted(draw(st.sets(st.integers(1, q - 1), min_size=k - 1, max_size=k - 1))) if k > 1 else []
    bps = [ZERO] + [F(c, q) for c in cuts] + [ONE]
    raw = draw(st.lists(st.integers(0, 9), min_size=len(bps) - 1, max_size=len(bps) - 1))
    if not any(raw):
        raw[-1] = 1
    total = sum(r * (b - a) for r, a, b in zip(raw, bps, bps[1:]))
    return ValuationDensity(bps, [F(r) / total for r in raw])


@st.composite
def pieces(draw, max_intervals=4):
    q = draw(st.integers(2, 40))
    pts = sorted(draw(st.sets(st.integers(0, q), max_size=2 * max_intervals)))
    if len(pts) % 2:
        pts = pts[:-1]
    return Piece([(F(a, q), F(b, q)) for a, b in zip(pts[::2], pts[1::2])])


rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=64)
