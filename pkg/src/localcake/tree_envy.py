"""TreeCore: a bounded locally envy-free partial allocation on rooted trees.

The root cuts the cake into n pieces she values equally. Walking the tree
in BFS order, each agent first trims all the pieces she holds down to her
least favourite one, then lets each child (ascending id) take as many of
her favourite remaining pieces as its subtree has agents, and keeps the
last piece herself. Trimmings go to the residue, which stays unallocated.
"""
from __future__ import annotations

from fractions import Fraction

from .fairness import Allocation
from .measure import Piece, union_all
from .serialization import piece_to_json
from .tracing import Trace


def equalize_pieces(agent: int, pieces, oracle, values=None):
    """Trim every piece to the value of ``agent``'s least favourite one.

    The suffix of each richer piece is shaved off. ``values`` may carry the
    agent's known values of ``pieces`` so they are not queried again.
    Returns ``(trimmed, shavings)``.
    """
    pieces = list(pieces)
    if not pieces:
        raise ValueError("equalize_pieces needs at least one piece")
    if values is None:
        values = [oracle.eval_query(agent, p) for p in pieces]
    low = min(values)
    out, shaved = [], []
    for p, v in zip(pieces, values):
        if v == low:
            out.append(p)
            continue
        keep, cut = oracle.cut_prefix(agent, p, low)
        out.append(keep)
        shaved.append(cut)
    return out, union_all(shaved)


def tree_core(tree, oracle, trace=None):
    """Run TreeCore on ``tree``; returns ``(allocation, residue)``.

    The allocation's own residue field holds the same residue piece.
    """
    trace = trace if trace is not None else Trace()
    n = tree.n
    r = tree.root
    pieces = []
    rest = Piece.whole()
    share = Fraction(1, n)
    for _ in range(n - 1):
        head, rest = oracle.cut_prefix(r, rest, share)
        pieces.append(head)
    pieces.append(rest)
    trace.emit("root_cut", agent=r, pieces=[piece_to_json(p) for p in pieces])

    # The root's pieces are equal by construction, so she already knows their values.
    holding = {r: (pieces, [share] * n)}
    kept = [Piece.empty()] * n
    shavings = []
    for v in tree.bfs_order():
        held, values = holding.pop(v)
        held, shaved = equalize_pieces(v, held, oracle, values)
        shavings.append(shaved)
        trace.emit("equalize", agent=v, pieces=[piece_to_json(p) for p in held], shavings=piece_to_json(shaved))
        for u in tree.children[v]:
            worth = [oracle.eval_query(u, p) for p in held]
            best = sorted(range(len(held)), key=lambda i: (-worth[i], i))[:tree.subtree_size[u]]
            take = sorted(best)
            holding[u] = ([held[i] for i in take], [worth[i] for i in take])
            trace.emit("take", agent=u, parent=v, indices=take)
            held = [p for i, p in enumerate(held) if i not in take]
        (kept[v],) = held
        trace.emit("keep", agent=v, piece=piece_to_json(held[0]))
    residue = union_all(shavings)
    return Allocation(kept, residue), residue
