"""JSON encodings with exact rationals written as ``"p/q"`` strings.

Every file is dumped with sorted keys and a trailing newline so equal
objects always produce identical bytes.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .errors import CakeError, InvalidGraph, OverlapError, ParseError
from .fairness import Allocation
from .graph import RootedTree, SocialGraph
from .measure import Piece, ValuationDensity, as_rat, rat_str


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def parse_rat(x) -> Fraction:
    try:
        return as_rat(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact rational: {x!r}") from exc


def piece_to_json(p: Piece) -> list:
    return [[rat_str(lo), rat_str(hi)] for lo, hi in p.intervals]


def piece_from_json(d, strict=True) -> Piece:
    """Parse ``[[lo, hi], ...]``.

    With ``strict`` the intervals must already be canonical (sorted,
    disjoint, non-touching, nonempty); anything else is reported as a
    ParseError rather than silently merged.
    """
    try:
        ivs = [(parse_rat(lo), parse_rat(hi)) for lo, hi in d]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad piece encoding: {d!r}") from exc
    try:
        p = Piece(ivs)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if strict and p.intervals != tuple(ivs):
        raise ParseError(f"piece {d!r} is not in canonical form")
    return p


def density_to_json(f: ValuationDensity) -> dict:
    return {"breakpoints": [rat_str(b) for b in f.breakpoints],
            "weights": [rat_str(w) for w in f.weights]}


def density_from_json(d) -> ValuationDensity:
    try:
        return ValuationDensity([parse_rat(b) for b in d["breakpoints"]],
                                [parse_rat(w) for w in d["weights"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad density: {exc}") from exc


def allocation_to_json(alloc: Allocation) -> dict:
    return {"pieces": [piece_to_json(p) for p in alloc.pieces],
            "residue": piece_to_json(alloc.residue)}


def allocation_from_json(d) -> Allocation:
    """Parse and validate an allocation; overlaps are parse errors."""
    if isinstance(d, dict) and "allocation" in d:
        d = d["allocation"]
    try:
        alloc = Allocation([piece_from_json(p) for p in d["pieces"]], piece_from_json(d["residue"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad allocation: {exc}") from exc
    try:
        alloc.validate()
    except OverlapError as exc:
        raise ParseError(f"allocation is not a partition of the cake: {exc}") from exc
    return alloc


class Instance:
    """A social graph, one density per agent, an optional rooted tree."""

    def __init__(self, graph: SocialGraph, densities, seed=None, metadata=None, root=None, parents=None):
        if len(densities) != graph.n:
            raise ParseError(f"{graph.n} agents but {len(densities)} densities")
        self.graph = graph
        self.densities = tuple(densities)
        self.seed = seed
        self.metadata = dict(metadata or {})
        self.root = root
        self.parents = None if parents is None else tuple(parents)

    @property
    def n(self) -> int:
        return self.graph.n

    def tree(self) -> RootedTree:
        """The rooted tree for TreeCore: the parent array if given, else the
        graph hung from ``root``."""
        if self.parents is not None:
            t = RootedTree(self.parents)
            if t.to_graph() != self.graph:
                raise InvalidGraph("parent array does not match the edge list")
            if self.root is not None and t.root != self.root:
                raise InvalidGraph("root field disagrees with the parent array")
            return t
        if self.root is None:
            raise InvalidGraph("tree protocols need a root")
        return RootedTree.from_graph(self.graph, self.root)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "edges": [list(e) for e in self.graph.edges],
            "densities": [density_to_json(f) for f in self.densities],
            "seed": self.seed,
            "metadata": self.metadata,
        }
        if self.root is not None:
            d["root"] = self.root
        if self.parents is not None:
            d["parents"] = list(self.parents)
        return d

    @classmethod
    def from_dict(cls, d) -> "Instance":
        try:
            graph = SocialGraph(int(d["n"]), [tuple(e) for e in d.get("edges", [])])
            densities = [density_from_json(x) for x in d["densities"]]
            root = d.get("root")
            return cls(graph, densities, d.get("seed"), d.get("metadata"),
                       None if root is None else int(root), d.get("parents"))
        except ParseError:
            raise
        except (CakeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad instance: {exc}") from exc

    def dumps(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def load(cls, path) -> "Instance":
        return cls.from_dict(read_json(path))
