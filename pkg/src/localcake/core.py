"""The Aziz-Mackenzie Core and SubCore protocols.

``core`` has the cutter divide the residue into ``m`` pieces she values
equally and lets SubCore hand the other participants one (possibly trimmed)
piece each, envy-free, leaving an untrimmed piece for the cutter.
Everything trimmed off stays in the residue.

Trims on a piece are compared by their position in the piece's linear order
(left-to-right concatenation of its intervals). A trim at position ``x``
leaves ``piece.clip(x)`` to the right of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BenchmarkInfeasible, EmptyParticipants, TooFewParticipants
from .measure import ZERO, Piece, union_all


@dataclass
class Snapshot:
    """One Core output. ``assignment`` maps agent -> (piece, source index)."""

    cutter: int
    participants: tuple
    sources: tuple
    assignment: dict
    residue_before: Piece
    residue_after: Piece
    insignificant: tuple | None = None

    def piece(self, agent: int) -> Piece:
        entry = self.assignment.get(agent)
        return entry[0] if entry else Piece.empty()

    def source_index(self, agent: int):
        entry = self.assignment.get(agent)
        return entry[1] if entry else None

    def complete_holders(self) -> list:
        """Participants holding an untrimmed source piece."""
        return sorted(a for a, (p, i) in self.assignment.items() if p == self.sources[i])

    @property
    def m(self) -> int:
        return len(self.participants)

    def copy(self) -> "Snapshot":
        return Snapshot(self.cutter, self.participants, self.sources, dict(self.assignment),
                        self.residue_before, self.residue_after, self.insignificant)


@dataclass
class TrimRecord:
    """One trim. Across a gap the agent does not value, every position in
    ``[trim_position, latest_position]`` leaves her exactly ``trim_value``."""

    piece_index: int
    agent: int
    trim_value: Fraction
    trim_position: Fraction
    latest_position: Fraction


@dataclass
class _Contest:
    pieces: list
    contenders: list
    contested: list
    launch: dict
    benchmarks: dict
    oracle: object
    rank: dict
    trims: dict = field(default_factory=dict)
    needy: dict = field(default_factory=dict)

    def eligible(self, p: int, pool) -> list:
        """Agents of ``pool`` who can hold the rightmost trim on piece ``p``.

        ``j`` qualifies when the latest point of her trim is at or right of
        the earliest point of every other trim in ``pool``.
        """
        marks = {j: self.trims[j, p] for j in pool if (j, p) in self.trims}
        out = []
        for j, (_, hi) in marks.items():
            if all(hi >= lo for i, (lo, _) in marks.items() if i != j):
                out.append(j)
        return sorted(out)

    def margin(self, p: int, pool):
        """Left margin of piece ``p`` set by ``pool``'s trims, or None."""
        marks = [self.trims[j, p][0] for j in pool if (j, p) in self.trims]
        return max(marks) if marks else None

    def claim_rank(self, outside) -> dict:
        """Rank contested pieces no outsider trimmed ahead of claimed ones.

        An indifferent insider should leave a claimed piece open, since only
        a claimed piece can be handed to an outsider.
        """
        k = len(self.contested)
        return {i: (0 if self.margin(p, outside) is None else k) + i for i, p in enumerate(self.contested)}

    def margins(self, outside) -> list:
        out = []
        for p in self.contested:
            x = self.margin(p, outside)
            out.append(self.pieces[p] if x is None else self.pieces[p].clip(x))
        return out


def _match(options: dict, order) -> dict:
    """Maximum matching of agents to pieces, filled greedily along ``order``.

    ``options[j]`` lists the pieces agent ``j`` may take. Augmenting in
    priority order matches every agent an earlier-first maximum matching
    can, so higher-priority agents are never displaced by later ones.
    """
    owner = {}

    def augment(j, seen):
        for p in options.get(j, ()):
            if p in seen:
                continue
            seen.add(p)
            if p not in owner or augment(owner[p], seen):
                owner[p] = j
                return True
        return False

    for j in order:
        augment(j, set())
    return {j: p for p, j in owner.items()}


def _favourite(values, indices, rank=None) -> int:
    """Most valued index; ties go to the lowest ``rank`` (default: index)."""
    rank = rank or {}
    return max(indices, key=lambda i: (values[i], -rank.get(i, i), -i))


def subcore(pieces, agents, benchmarks, oracle, trims_log=None, rank=None) -> dict:
    """SubCore: give each agent at most one connected sub-piece, envy-free.

    ``pieces`` are the available pieces, ``agents`` is processed in the given
    order, ``benchmarks[j]`` is the value agent ``j`` must at least receive.
    Returns ``{agent: (piece_index, sub_piece)}`` where ``sub_piece`` is a
    suffix of ``pieces[piece_index]``. No agent envies another agent's
    sub-piece or any piece left unallocated. ``rank`` orders pieces for
    breaking ties between equally valued favourites.
    """
    pieces = list(pieces)
    agents = list(agents)
    if len(pieces) < len(agents):
        raise ValueError("SubCore needs at least as many pieces as agents")
    launch = {j: [oracle.eval_query(j, p) for p in pieces] for j in agents}
    held = {}
    for pos, agent in enumerate(agents):
        fav = _favourite(launch[agent], range(len(pieces)), rank)
        taken = {i for i, _ in held.values()}
        if fav not in taken:
            if launch[agent][fav] < benchmarks[agent]:
                raise BenchmarkInfeasible(f"agent {agent}: best piece below benchmark")
            held[agent] = (fav, pieces[fav])
            continue
        contest = _Contest(pieces, agents[:pos + 1], sorted(taken), launch, benchmarks, oracle, rank or {})
        held = _settle(contest, trims_log)
    return held


def _settle(c: _Contest, trims_log) -> dict:
    """Resolve m agents contesting the m-1 tentatively allocated pieces."""
    oracle = c.oracle
    contested_set = set(c.contested)
    free = [i for i in range(len(c.pieces)) if i not in contested_set]
    level = {}
    for j in c.contenders:
        best_free = max(c.launch[j][i] for i in free)
        level[j] = max(c.benchmarks[j], best_free)
        c.needy[j] = c.benchmarks[j] > best_free
    for j in c.contenders:
        for p in c.contested:
            worth = c.launch[j][p]
            if worth >= level[j]:
                piece = c.pieces[p]
                _, suffix = oracle.cut_prefix(j, piece, worth - level[j])
                lo = suffix.start if suffix else piece.end
                _, suffix = oracle.cut_suffix(j, piece, level[j])
                hi = suffix.start if suffix else piece.end
                c.trims[j, p] = (lo, hi)
                if trims_log is not None:
                    trims_log.append(TrimRecord(p, j, level[j], lo, hi))

    k = len(c.contested)
    # Needy agents cannot fall back on an uncontested piece, so they join W
    # first; next come agents whose fallback is a piece the caller wants
    # kept open.
    n = len(c.pieces)
    fallback_open = {j: c.rank.get(_favourite(c.launch[j], free, c.rank), 0) >= n for j in c.contenders}
    priority = sorted(c.contenders, key=lambda j: (not c.needy[j], not fallback_open[j], j))
    options = {}
    for p in c.contested:
        for j in c.eligible(p, c.contenders):
            options.setdefault(j, []).append(p)
    winners = set(_match(options, priority))
    while len(winners) < k:
        outside = [j for j in c.contenders if j not in winners]
        got = subcore(c.margins(outside), sorted(winners), {j: level[j] for j in winners}, oracle,
                      trims_log, c.claim_rank(outside))
        used = {i for i, _ in got.values()}
        cands = []
        for i in range(k):
            p = c.contested[i]
            x = c.margin(p, outside)
            if i not in used and x is not None:
                cands += [(not c.needy[j], i, j) for j in outside
                          if (j, p) in c.trims and c.trims[j, p][0] == x]
        if not cands:
            raise BenchmarkInfeasible("no unallocated contested piece has an outside margin")
        newcomer = min(cands)[2]
        for j, (_, sub) in got.items():
            level[j] = oracle.eval_query(j, sub)
        winners.add(newcomer)

    (last,) = [j for j in c.contenders if j not in winners]
    got = subcore(c.margins([last]), sorted(winners), {j: level[j] for j in winners}, oracle, trims_log)
    fav = _favourite(c.launch[last], free, c.rank)
    if c.launch[last][fav] < c.benchmarks[last]:
        raise BenchmarkInfeasible(f"agent {last}: best uncontested piece below benchmark")
    held = {j: (c.contested[i], sub) for j, (i, sub) in got.items()}
    held[last] = (fav, c.pieces[fav])
    return held


def core(cutter: int, participants, residue: Piece, oracle, trims_log=None) -> Snapshot:
    """Run Core(cutter, participants, residue) and return the snapshot."""
    participants = tuple(sorted(set(participants)))
    if not participants:
        raise EmptyParticipants("Core needs at least one participant")
    if cutter not in participants:
        raise ValueError(f"cutter {cutter} is not a participant")
    m = len(participants)
    if m == 1:
        return Snapshot(cutter, participants, (residue,), {cutter: (residue, 0)}, residue, Piece.empty())

    share = oracle.eval_query(cutter, residue) / m
    sources = []
    rest = residue
    for _ in range(m - 1):
        head, rest = oracle.cut_prefix(cutter, rest, share)
        sources.append(head)
    sources.append(rest)

    others = [a for a in participants if a != cutter]
    if m == 2:
        # cut and choose
        chooser = others[0]
        a, b = (oracle.eval_query(chooser, s) for s in sources)
        pick = 0 if a >= b else 1
        held = {chooser: (pick, sources[pick])}
    else:
        held = subcore(sources, others, {a: ZERO for a in others}, oracle, trims_log)

    taken = {i for i, _ in held.values()}
    spare = min(i for i in range(m) if i not in taken)
    assignment = {a: (sub, i) for a, (i, sub) in held.items()}
    assignment[cutter] = (sources[spare], spare)
    allocated = union_all(p for p, _ in assignment.values())
    return Snapshot(cutter, participants, tuple(sources), assignment, residue, residue.subtract(allocated))


def find_insignificant(snapshot: Snapshot, oracle) -> list:
    """Non-cutters over whom the cutter's bonus is at least f_r(R')/(m-2).

    Uses counted evaluation queries by the cutter.
    """
    m = snapshot.m
    if m < 3:
        raise TooFewParticipants("insignificance needs at least three participants")
    r = snapshot.cutter
    own = oracle.eval_query(r, snapshot.piece(r))
    threshold = oracle.eval_query(r, snapshot.residue_after) / (m - 2)
    return [u for u in snapshot.participants
            if u != r and own - oracle.eval_query(r, snapshot.piece(u)) >= threshold]
