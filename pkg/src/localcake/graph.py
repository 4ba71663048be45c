"""Undirected social graphs and rooted trees.

All tie-breaking is lexicographic (lowest agent id first) so that protocol
runs are reproducible.
"""
from __future__ import annotations

from collections import deque

from .errors import InvalidGraph, UnknownAgent


class SocialGraph:
    """Connected undirected graph on agents ``0..n-1``."""

    def __init__(self, n: int, edges=()):
        if n < 1:
            raise InvalidGraph("a social graph needs at least one agent")
        adj = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraph(f"edge ({u}, {v}) names an agent outside 0..{n - 1}")
            if u == v:
                raise InvalidGraph(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj = tuple(tuple(sorted(s)) for s in adj)
        self.edges = tuple(sorted((u, v) for u in range(n) for v in self._adj[u] if u < v))
        if len(self.bfs_order(0)) != n:
            raise InvalidGraph("social graph must be connected")

    def __repr__(self):
        return f"SocialGraph(n={self.n}, edges={list(self.edges)})"

    def __eq__(self, other):
        return isinstance(other, SocialGraph) and self.n == other.n and self.edges == other.edges

    def _check(self, v):
        if not (isinstance(v, int) and 0 <= v < self.n):
            raise UnknownAgent(f"no agent {v!r} in a graph of {self.n} agents")

    @property
    def agents(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> tuple:
        self._check(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self._adj[v])

    def adjacent(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return v in self._adj[u]

    def bfs_order(self, source: int) -> list:
        """Vertices reachable from ``source`` in BFS order, neighbours ascending."""
        seen = {source}
        order = [source]
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y in self._adj[x]:
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    queue.append(y)
        return order

    def distances(self, source: int) -> list:
        self._check(source)
        dist = [None] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y in self._adj[x]:
                if dist[y] is None:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def eccentricity(self, v: int) -> int:
        return max(self.distances(v))

    def diameter(self) -> int:
        return max(self.eccentricity(v) for v in self.agents)

    def radius(self) -> int:
        return min(self.eccentricity(v) for v in self.agents)

    def center_vertex(self) -> int:
        """Lowest-id vertex of minimum eccentricity."""
        ecc = [self.eccentricity(v) for v in self.agents]
        return ecc.index(min(ecc))

    def shortest_path(self, u: int, r: int) -> list:
        """Shortest path ``[u, ..., r]``.

        BFS runs from ``r``; every vertex's parent is its lowest-id neighbour
        one step closer to ``r``.
        """
        self._check(u)
        dist = self.distances(r)
        path = [u]
        while path[-1] != r:
            x = path[-1]
            path.append(min(y for y in self._adj[x] if dist[y] == dist[x] - 1))
        return path

    def is_tree(self) -> bool:
        return len(self.edges) == self.n - 1

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "SocialGraph":
        return cls(int(d["n"]), [tuple(e) for e in d.get("edges", [])])


class RootedTree:
    """A tree on agents ``0..n-1`` hanging from ``root``."""

    def __init__(self, parents):
        parents = [None if p is None else int(p) for p in parents]
        n = len(parents)
        roots = [v for v, p in enumerate(parents) if p is None]
        if n == 0 or len(roots) != 1:
            raise InvalidGraph("a rooted tree needs exactly one root")
        children = [[] for _ in range(n)]
        for v, p in enumerate(parents):
            if p is not None:
                if not 0 <= p < n or p == v:
                    raise InvalidGraph(f"bad parent {p} for agent {v}")
                children[p].append(v)
        self.n = n
        self.root = roots[0]
        self.parent = tuple(parents)
        self.children = tuple(tuple(sorted(c)) for c in children)
        order = [self.root]
        for v in order:
            order.extend(self.children[v])
        if len(order) != n:
            raise InvalidGraph("parent array contains a cycle")
        self._order = tuple(order)
        size = [1] * n
        for v in reversed(order):
            if parents[v] is not None:
                size[parents[v]] += size[v]
        self.subtree_size = tuple(size)

    @classmethod
    def from_graph(cls, graph: SocialGraph, root: int) -> "RootedTree":
        if not graph.is_tree():
            raise InvalidGraph("graph is not a tree")
        dist = graph.distances(root)
        parents = [None] * graph.n
        for v in graph.agents:
            if v != root:
                parents[v] = min(u for u in graph.neighbors(v) if dist[u] == dist[v] - 1)
        return cls(parents)

    def bfs_order(self) -> tuple:
        return self._order

    def to_graph(self) -> SocialGraph:
        return SocialGraph(self.n, [(v, p) for v, p in enumerate(self.parent) if p is not None])

    def descendants(self, v: int) -> list:
        out = []
        stack = list(self.children[v])
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return sorted(out)
