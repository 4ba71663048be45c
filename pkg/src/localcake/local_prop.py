"""Locally proportional allocation on arbitrary connected social graphs.

``create_dominance`` makes one agent dominant by running Core with her as
cutter and, if the insignificant pieces keep landing on non-neighbours,
walking one of them to her along a shortest path by swapping adjacent
agents' pieces inside selected snapshots. ``diffuse_dominance`` then spreads
dominance outward and finishes the cake. ``main_protocol`` chains the two.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, prod

from .core import Snapshot, core, find_insignificant
from .errors import CapExceeded, NotAdjacent, NotDominant, NotParticipants, PoolTooSmall
from .fairness import Allocation, is_dominant
from .measure import Piece, union_all
from .tracing import Trace

# Upper bound on ln 3 used for every dominance-spreading repetition count.
LN3_UPPER = Fraction(10986, 10000)


def ceil_log2(x: int) -> int:
    """Smallest e with 2**e >= x; an integer upper bound on ln x as well."""
    if x < 1:
        raise ValueError("ceil_log2 needs x >= 1")
    return (x - 1).bit_length()


def spread_repetitions(m: int) -> int:
    """Core calls a new cutter needs among m remaining agents: ceil((m-2) ln 3)."""
    if m < 3:
        return 1
    return ceil((m - 2) * LN3_UPPER)


def dominance_cap(n: int, multiplier=1) -> int:
    """Cap on the extra Core calls that make the cutter dominate a neighbour.

    Over-approximates (n/2) ln(n-2) by (n/2) * ceil(log2(n-2)); this is 0 for
    n = 3, where one insignificant piece already settles dominance.
    """
    if n < 3:
        return 0
    return ceil(ceil(Fraction(n * ceil_log2(n - 2), 2)) * Fraction(multiplier))


def diffuse_budget(n: int) -> int:
    """Reference budget on DiffuseDominance's Core calls."""
    return n * spread_repetitions(n) + n


def path_target(graph, path) -> int:
    """Snapshots a path's first agent must collect so the halving cascade
    along ``path`` (ending at the dominant agent) leaves at least one."""
    d = [graph.degree(x) for x in path[:-1]]
    return prod(d[i] + d[i + 1] + 1 for i in range(len(d) - 1))


def loose_target(n: int, k: int) -> Fraction:
    """The coarser (6n/k)^k snapshot count, reported for reference only."""
    return Fraction(6 * n, k) ** k


@dataclass
class AllocationState:
    """A base allocation, the Core snapshots taken on top of it, and the residue.

    Snapshots stay individually addressable so pieces can be exchanged
    inside one of them; the allocation is always derived by union.
    """

    base: Allocation
    snapshots: list = field(default_factory=list)
    residue: Piece = field(default_factory=Piece.whole)

    @classmethod
    def fresh(cls, n: int) -> "AllocationState":
        return cls(Allocation([Piece.empty()] * n, Piece.empty()), [], Piece.whole())

    @property
    def n(self) -> int:
        return self.base.n

    def add(self, snap: Snapshot) -> int:
        self.snapshots.append(snap)
        self.residue = snap.residue_after
        return len(self.snapshots) - 1

    def piece(self, agent: int) -> Piece:
        return union_all([self.base.pieces[agent]] + [s.piece(agent) for s in self.snapshots])

    def derived(self) -> Allocation:
        return Allocation([self.piece(a) for a in range(self.n)], self.residue)


@dataclass
class InsignificantTally:
    """Which snapshots gave each agent an insignificant piece, and how many
    each agent needs before its pieces can be walked to ``r``."""

    graph: object
    r: int
    paths: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    held: dict = field(default_factory=dict)

    def __post_init__(self):
        near = set(self.graph.neighbors(self.r)) | {self.r}
        for u in self.graph.agents:
            if u not in near:
                path = self.graph.shortest_path(u, self.r)
                self.paths[u] = path
                self.targets[u] = path_target(self.graph, path)
                self.held[u] = []

    def record(self, index: int, agents) -> int | None:
        """Tally snapshot ``index``; return the lowest agent now at target."""
        for u in agents:
            if u in self.held:
                self.held[u].append(index)
        ready = [u for u in sorted(self.held) if len(self.held[u]) >= self.targets[u]]
        return ready[0] if ready else None


def run_core(state: AllocationState, cutter: int, participants, oracle, trace: Trace, phase: str,
             insignificant=False) -> Snapshot:
    snap = core(cutter, participants, state.residue, oracle)
    if insignificant and snap.m >= 3:
        snap.insignificant = tuple(find_insignificant(snap, oracle))
    index = state.add(snap)
    trace.record_snapshot(snap, index, phase)
    return snap


def exchange_in_snapshot(state: AllocationState, snapshot_index: int, a: int, b: int, graph=None) -> AllocationState:
    """Swap what ``a`` and ``b`` hold in one snapshot. Free of queries."""
    if graph is not None and not graph.adjacent(a, b):
        raise NotAdjacent(f"agents {a} and {b} are not adjacent")
    snap = state.snapshots[snapshot_index]
    if a not in snap.assignment or b not in snap.assignment:
        raise NotParticipants(f"agents {a} and {b} did not both take part in snapshot {snapshot_index}")
    snap.assignment[a], snap.assignment[b] = snap.assignment[b], snap.assignment[a]
    return state


def select_bonus_snapshots(state: AllocationState, chooser: int, opponent: int, pool, count: int, oracle) -> list:
    """The ``count`` snapshots of ``pool`` where ``chooser``'s bonus over
    ``opponent`` is largest, ties to the lowest index. Returned ascending."""
    pool = list(pool)
    if count > len(pool):
        raise PoolTooSmall(f"asked for {count} of {len(pool)} snapshots")
    if count <= 0:
        return []
    bonus = {}
    for j in pool:
        s = state.snapshots[j]
        bonus[j] = oracle.eval_query(chooser, s.piece(chooser)) - oracle.eval_query(chooser, s.piece(opponent))
    return sorted(sorted(pool, key=lambda j: (-bonus[j], j))[:count])


def _dominates(state, r, v, oracle) -> bool:
    """r's own check, with counted queries, that her bonus over v covers the residue."""
    if state.residue.is_empty():
        return oracle.eval_query(r, state.piece(r)) >= oracle.eval_query(r, state.piece(v))
    return (oracle.eval_query(r, state.piece(r)) - oracle.eval_query(r, state.piece(v))
            >= oracle.eval_query(r, state.residue))


def _make_dominate(graph, state, r, v, oracle, trace, cap_multiplier, how):
    cap = dominance_cap(graph.n, cap_multiplier)
    rounds = 0
    while not _dominates(state, r, v, oracle):
        if rounds >= cap:
            raise CapExceeded(f"agent {r} still does not dominate {v} after {cap} extra Core calls")
        run_core(state, r, graph.agents, oracle, trace, "create_dominance")
        rounds += 1
    trace.emit("dominance", agent=r, over=v, how=how, extra_core_calls=rounds, cap=cap)


def _cascade(graph, state, u, tally, oracle, trace):
    path = tally.paths[u]
    target = tally.targets[u]
    pool = tally.held[u][:target]
    steps = []
    for i in range(len(path) - 2):
        a, b = path[i], path[i + 1]
        da, db = graph.degree(a), graph.degree(b)
        size, rem = divmod(len(pool), da + db + 1)
        assert rem == 0, "path targets keep every pool divisible"
        first = select_bonus_snapshots(state, a, b, pool, da * size, oracle)
        rest = [j for j in pool if j not in first]
        second = select_bonus_snapshots(state, b, a, rest, db * size, oracle)
        pool = [j for j in rest if j not in second]
        for j in pool:
            exchange_in_snapshot(state, j, a, b, graph)
            trace.emit("exchange", snapshot=j, a=a, b=b)
        steps.append({"a": a, "b": b, "first": first, "second": second, "kept": list(pool)})
    trace.emit("cascade", agent=u, path=list(path), target=target, pool=tally.held[u][:target], steps=steps)
    return path[-2]


def create_dominance(graph, state: AllocationState, r: int, oracle, trace=None, cap_multiplier=1) -> AllocationState:
    """Leave a locally proportional partial allocation in which ``r`` is dominant."""
    trace = trace if trace is not None else Trace()
    everyone = graph.agents
    if graph.n <= 2:
        run_core(state, r, everyone, oracle, trace, "create_dominance")
        trace.emit("dominance", agent=r, over=None, how="empty residue", extra_core_calls=0, cap=0)
        return state
    near = set(graph.neighbors(r))
    tally = InsignificantTally(graph, r)
    while True:
        snap = run_core(state, r, everyone, oracle, trace, "create_dominance", insignificant=True)
        if state.residue.is_empty():
            trace.emit("dominance", agent=r, over=None, how="empty residue", extra_core_calls=0, cap=0)
            return state
        hit = [v for v in snap.insignificant if v in near]
        if hit:
            _make_dominate(graph, state, r, hit[0], oracle, trace, cap_multiplier, "neighbour insignificant")
            return state
        u = tally.record(len(state.snapshots) - 1, snap.insignificant)
        if u is not None:
            break
    v = _cascade(graph, state, u, tally, oracle, trace)
    _make_dominate(graph, state, r, v, oracle, trace, cap_multiplier, "cascade")
    return state


def diffuse_dominance(graph, state: AllocationState, r: int, oracle, trace=None) -> Allocation:
    """Finish the cake, making every agent dominant in BFS order from ``r``."""
    trace = trace if trace is not None else Trace()
    if not is_dominant(state.derived(), graph, r, oracle):
        raise NotDominant(f"agent {r} is not dominant")
    done = {r}
    for v in graph.bfs_order(r)[1:]:
        m = graph.n - len(done)
        reps = spread_repetitions(m)
        calls = 0
        while calls < reps and not state.residue.is_empty():
            run_core(state, v, [x for x in graph.agents if x not in done], oracle, trace, "diffuse_dominance")
            calls += 1
        done.add(v)
        trace.emit("dominance", agent=v, over=None, how="diffuse", m=m, repetitions=reps, core_calls=calls)
    return state.derived()


def main_protocol(graph, oracle, trace=None, cap_multiplier=1) -> Allocation:
    """Complete locally proportional allocation of the whole cake."""
    trace = trace if trace is not None else Trace()
    if graph.n == 1:
        with trace.phase("whole_cake", oracle):
            trace.emit("assign_whole", agent=0)
        return Allocation([Piece.whole()], Piece.empty())
    r = graph.center_vertex()
    state = AllocationState.fresh(graph.n)
    with trace.phase("create_dominance", oracle, r=r):
        create_dominance(graph, state, r, oracle, trace, cap_multiplier)
    with trace.phase("diffuse_dominance", oracle, r=r):
        return diffuse_dominance(graph, state, r, oracle, trace)
