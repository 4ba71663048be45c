from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import UNIFORM, densities, density
from localcake.core import Snapshot, core, find_insignificant, subcore
from localcake.errors import EmptyParticipants, TooFewParticipants
from localcake.fairness import snapshot_contract
from localcake.measure import ZERO, Piece, QueryOracle

LEFT_THIRD = density(["0", "1/3", "1"], ["3", "0"])


def iv(a, b):
    return Piece.interval(F(a), F(b))


def thirds():
    return [iv(0, "1/3"), iv("1/3", "2/3"), iv("2/3", 1)]


def contract_holds(snap, oracle):
    return all(snapshot_contract(snap, oracle).values())


class TestCore:
    def test_single_participant_takes_all(self):
        o = QueryOracle([UNIFORM])
        s = core(0, [0], iv(0, "1/2"), o)
        assert s.piece(0) == iv(0, "1/2") and s.residue_after.is_empty()

    def test_cut_and_choose(self):
        o = QueryOracle([UNIFORM, UNIFORM])
        s = core(0, [0, 1], Piece.whole(), o)
        assert o.audit.value(0, s.piece(0)) == F(1, 2)
        assert o.audit.value(1, s.piece(1)) == F(1, 2)
        assert s.residue_after.is_empty()
        assert s.sources == (iv(0, "1/2"), iv("1/2", 1))

    def test_symmetric_three(self):
        o = QueryOracle([UNIFORM] * 3)
        s = core(0, [0, 1, 2], Piece.whole(), o)
        assert s.residue_after.is_empty()
        assert all(o.audit.value(a, s.piece(a)) == F(1, 3) for a in range(3))
        assert s.complete_holders() == [0, 1, 2]

    def test_contested_piece_gets_trimmed(self):
        o = QueryOracle([UNIFORM, LEFT_THIRD, LEFT_THIRD])
        s = core(0, [0, 1, 2], Piece.whole(), o)
        assert contract_holds(s, o)
        assert not s.residue_after.is_empty()

    def test_errors(self):
        o = QueryOracle([UNIFORM] * 2)
        with pytest.raises(EmptyParticipants):
            core(0, [], Piece.whole(), o)
        with pytest.raises(ValueError):
            core(0, [1], Piece.whole(), o)


class TestSubcore:
    def test_distinct_favourites(self):
        fs = [density(["0", "1/3", "1"], ["3", "0"]), density(["0", "1/3", "2/3", "1"], ["0", "3", "0"])]
        o = QueryOracle(fs)
        got = subcore(thirds(), [0, 1], {0: ZERO, 1: ZERO}, o)
        assert got == {0: (0, thirds()[0]), 1: (1, thirds()[1])}

    def test_single_agent(self):
        f = density(["0", "2/3", "1"], ["0", "3"])
        got = subcore(thirds(), [0], {0: ZERO}, QueryOracle([f]))
        assert got == {0: (2, thirds()[2])}

    def test_two_agents_same_favourite(self):
        o = QueryOracle([LEFT_THIRD, density(["0", "1/3", "1"], ["2", "1/2"])])
        log = []
        ps = thirds()
        got = subcore(ps, [0, 1], {0: ZERO, 1: ZERO}, o, log)
        assert log
        for rec in log:
            # the suffix right of each trim is worth exactly the trim value
            assert o.audit.value(rec.agent, ps[rec.piece_index].clip(rec.trim_position)) == rec.trim_value
        _check_envy_free(got, ps, o, {0: ZERO, 1: ZERO})

    def test_too_few_pieces(self):
        with pytest.raises(ValueError):
            subcore([Piece.whole()], [0, 1], {0: ZERO, 1: ZERO}, QueryOracle([UNIFORM] * 2))


def _check_envy_free(got, pieces, oracle, benchmarks):
    taken = {i for i, _ in got.values()}
    for a, (i, sub) in got.items():
        own = oracle.audit.value(a, sub)
        assert own >= benchmarks[a]
        assert pieces[i].contains(sub)
        for b, (_, other) in got.items():
            assert own >= oracle.audit.value(a, other)
        for j, p in enumerate(pieces):
            if j not in taken:
                assert own >= oracle.audit.value(a, p)


class TestInsignificant:
    def test_symmetric_all(self):
        o = QueryOracle([UNIFORM] * 4)
        s = core(0, [0, 1, 2, 3], Piece.whole(), o)
        assert find_insignificant(s, o) == [1, 2, 3]

    def test_boundary_is_inclusive(self):
        # bonus over agent 1 equals f_r(R')/(m-2) exactly
        src = tuple(thirds())
        s = Snapshot(0, (0, 1, 2), src,
                     {0: (src[0], 0), 1: (iv("5/12", "2/3"), 1), 2: (src[2], 2)},
                     Piece.whole(), iv("1/3", "5/12"))
        o = QueryOracle([UNIFORM] * 3)
        assert find_insignificant(s, o) == [1]
        assert o.ledger.evals[0] > 0

    def test_needs_three(self):
        o = QueryOracle([UNIFORM] * 2)
        s = core(0, [0, 1], Piece.whole(), o)
        with pytest.raises(TooFewParticipants):
            find_insignificant(s, o)


@st.composite
def core_cases(draw):
    m = draw(st.integers(1, 5))
    fs = [draw(densities()) for _ in range(m)]
    cutter = draw(st.integers(0, m - 1))
    q = draw(st.integers(2, 12))
    pts = sorted(draw(st.sets(st.integers(0, q), min_size=2, max_size=6)))
    if len(pts) % 2:
        pts = pts[:-1]
    residue = Piece([(F(a, q), F(b, q)) for a, b in zip(pts[::2], pts[1::2])])
    return fs, cutter, residue


@settings(max_examples=200, deadline=None)
@given(core_cases())
def test_snapshot_contract(case):
    fs, cutter, residue = case
    o = QueryOracle(fs)
    s = core(cutter, range(len(fs)), residue, o)
    c = snapshot_contract(s, o)
    assert all(c.values()), c
    if s.m <= 2:
        assert s.residue_after.is_empty()
    if s.m >= 3:
        assert find_insignificant(s, o)
    # every participant holds part of exactly one source piece
    for a, (p, i) in s.assignment.items():
        assert s.sources[i].contains(p)
    assert len({i for _, i in s.assignment.values()}) == s.m


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_subcore_envy_free_with_zero_benchmarks(data):
    k = data.draw(st.integers(1, 5))
    m = data.draw(st.integers(1, k))
    fs = [data.draw(densities()) for _ in range(m)]
    cuts = sorted(data.draw(st.sets(st.integers(1, 23), min_size=k - 1, max_size=k - 1)))
    bounds = [0] + cuts + [24]
    ps = [iv(F(a, 24), F(b, 24)) for a, b in zip(bounds, bounds[1:])]
    o = QueryOracle(fs)
    bench = {a: ZERO for a in range(m)}
    got = subcore(ps, list(range(m)), bench, o)
    assert sorted(got) == list(range(m))
    assert len({i for i, _ in got.values()}) == m
    _check_envy_free(got, ps, o, bench)
