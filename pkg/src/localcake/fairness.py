"""Exact fairness predicates evaluated through the uncounted audit channel."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import OverlapError
from .graph import SocialGraph
from .measure import ZERO, Piece, rat_str, union_all


@dataclass
class Allocation:
    """Per-agent pieces plus the unallocated residue."""

    pieces: tuple
    residue: Piece = field(default_factory=Piece.empty)

    def __post_init__(self):
        self.pieces = tuple(self.pieces)

    @property
    def n(self) -> int:
        return len(self.pieces)

    def validate(self) -> None:
        """Raise OverlapError unless pieces and residue partition [0, 1)."""
        covered = union_all(list(self.pieces) + [self.residue])
        if covered != Piece.whole():
            raise OverlapError(f"pieces and residue cover {covered!r}, not [0, 1)")

    @property
    def complete(self) -> bool:
        return self.residue.is_empty()


def _v(oracle, v, piece):
    return oracle.audit.value(v, piece)


def bonus(alloc: Allocation, v: int, u: int, oracle) -> Fraction:
    """Agent ``v``'s bonus over ``u``: f_v(A_v) - f_v(A_u)."""
    if u == v:
        raise ValueError("bonus needs two distinct agents")
    return _v(oracle, v, alloc.pieces[v]) - _v(oracle, v, alloc.pieces[u])


def proportionality_slack(alloc: Allocation, graph: SocialGraph, v: int, oracle) -> Fraction:
    """f_v(A_v) minus the average value v sees in her neighbours' pieces."""
    own = _v(oracle, v, alloc.pieces[v])
    nbrs = graph.neighbors(v)
    if not nbrs:
        return own
    return own - sum((_v(oracle, v, alloc.pieces[u]) for u in nbrs), ZERO) / len(nbrs)


def dominance_slack(alloc: Allocation, graph: SocialGraph, v: int, oracle) -> Fraction:
    own = _v(oracle, v, alloc.pieces[v])
    nbrs = graph.neighbors(v)
    residue = _v(oracle, v, alloc.residue)
    if not nbrs:
        return own - residue
    others = sum((_v(oracle, v, alloc.pieces[u]) for u in nbrs), ZERO)
    return own - (others + residue) / len(nbrs)


def is_locally_proportional(alloc: Allocation, graph: SocialGraph, oracle) -> bool:
    return all(proportionality_slack(alloc, graph, v, oracle) >= 0 for v in graph.agents)


def is_locally_envy_free(alloc: Allocation, graph: SocialGraph, oracle) -> bool:
    return all(bonus(alloc, v, u, oracle) >= 0 for v, u in _arcs(graph))


def is_globally_envy_free(alloc: Allocation, oracle) -> bool:
    n = alloc.n
    return all(bonus(alloc, v, u, oracle) >= 0 for v in range(n) for u in range(n) if u != v)


def is_dominant(alloc: Allocation, graph: SocialGraph, v: int, oracle) -> bool:
    return dominance_slack(alloc, graph, v, oracle) >= 0


def dominates(alloc: Allocation, v: int, u: int, oracle) -> bool:
    return bonus(alloc, v, u, oracle) >= _v(oracle, v, alloc.residue)


def _arcs(graph):
    return [(v, u) for v in graph.agents for u in graph.neighbors(v)]


@dataclass
class FairnessReport:
    proportionality_slack: list
    dominance_slack: list
    envy: dict
    locally_proportional: bool
    locally_envy_free: bool
    complete: bool

    def to_dict(self) -> dict:
        return {
            "proportionality_slack": [rat_str(s) for s in self.proportionality_slack],
            "dominance_slack": [rat_str(s) for s in self.dominance_slack],
            "envy": {f"{v}->{u}": rat_str(e) for (v, u), e in sorted(self.envy.items())},
            "locally_proportional": self.locally_proportional,
            "locally_envy_free": self.locally_envy_free,
            "complete": self.complete,
        }


def audit(alloc: Allocation, graph: SocialGraph, oracle) -> FairnessReport:
    """Evaluate every local fairness predicate exactly.

    ``envy[(v, u)]`` is f_v(A_u) - f_v(A_v) for each arc; positive means v
    envies her neighbour u.
    """
    alloc.validate()
    n = graph.n
    values = [[_v(oracle, v, alloc.pieces[u]) for u in range(n)] for v in range(n)]
    residue = [_v(oracle, v, alloc.residue) for v in range(n)]
    prop, dom = [], []
    for v in range(n):
        nbrs = graph.neighbors(v)
        d = len(nbrs) or 1
        others = sum((values[v][u] for u in nbrs), ZERO)
        prop.append(values[v][v] - others / d)
        dom.append(values[v][v] - (others + residue[v]) / d)
    envy = {(v, u): values[v][u] - values[v][v] for v, u in _arcs(graph)}
    return FairnessReport(
        proportionality_slack=prop,
        dominance_slack=dom,
        envy=envy,
        locally_proportional=all(s >= 0 for s in prop),
        locally_envy_free=all(e <= 0 for e in envy.values()),
        complete=alloc.complete,
    )


def snapshot_contract(snap, oracle) -> dict:
    """Check one Core output against its contract, exactly.

    Keys: envy_free (no participant prefers another's piece), cutter_exact
    (cutter holds exactly 1/m of the residue in her measure), complete_pieces
    (at least two untrimmed pieces, one when m = 1), shrink (for m >= 3 the
    cutter sees at most (m-2)/m of the residue left), conservation (pieces
    and new residue partition the old residue, each piece inside its source).
    """
    parts = snap.participants
    m = len(parts)
    c = snap.cutter
    val = {a: {b: _v(oracle, a, snap.piece(b)) for b in parts} for a in parts}
    before = _v(oracle, c, snap.residue_before)
    after = _v(oracle, c, snap.residue_after)
    try:
        covered = union_all([snap.piece(a) for a in parts] + [snap.residue_after])
        conserved = covered == snap.residue_before and all(
            snap.sources[i].contains(p) for p, i in snap.assignment.values())
    except OverlapError:
        conserved = False
    return {
        "envy_free": all(val[a][a] >= val[a][b] for a in parts for b in parts),
        "cutter_exact": val[c][c] == before / m,
        "complete_pieces": len(snap.complete_holders()) >= min(2, m),
        "shrink": m < 3 or after * m <= before * (m - 2),
        "conservation": conserved,
    }
