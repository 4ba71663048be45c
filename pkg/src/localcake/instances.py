"""Seeded generation of social graphs and valuation profiles."""
from __future__ import annotations

import random
from fractions import Fraction

from .errors import InvalidFamily, InvalidGraph
from .graph import RootedTree, SocialGraph
from .measure import ONE, ZERO, ValuationDensity
from .serialization import Instance

FAMILIES = ("path", "cycle", "star", "tree", "complete", "gnp")
PROFILES = ("uniform", "random-k-cells", "adversarial-skew")


def make_graph(n: int, family: str, rng: random.Random, p=Fraction(1, 2)) -> SocialGraph:
    if n < 1:
        raise InvalidGraph("need at least one agent")
    if family == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif family == "cycle":
        edges = [(i, i + 1) for i in range(n - 1)]
        if n >= 3:
            edges.append((n - 1, 0))
    elif family == "star":
        edges = [(0, i) for i in range(1, n)]
    elif family == "tree":
        edges = [(rng.randrange(v), v) for v in range(1, n)]
    elif family == "complete":
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif family == "gnp":
        while True:
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
            try:
                return SocialGraph(n, edges)
            except InvalidGraph:
                continue
    else:
        raise InvalidFamily(f"unknown graph family {family!r}; pick one of {', '.join(FAMILIES)}")
    return SocialGraph(n, edges)


def _normalised(breakpoints, raw) -> ValuationDensity:
    """Scale raw weights to integrate to one; the last weight is solved for."""
    lengths = [b - a for a, b in zip(breakpoints, breakpoints[1:])]
    total = sum((w * ln for w, ln in zip(raw, lengths)), ZERO)
    weights = [Fraction(w) / total for w in raw[:-1]]
    mass = sum((w * ln for w, ln in zip(weights, lengths)), ZERO)
    weights.append((ONE - mass) / lengths[-1])
    return ValuationDensity(breakpoints, weights)


def random_cells(rng: random.Random) -> ValuationDensity:
    k = rng.randint(2, 6)
    q = rng.choice([12, 16, 20, 24, 30])
    cuts = sorted(rng.sample(range(1, q), k - 1))
    bps = [ZERO] + [Fraction(c, q) for c in cuts] + [ONE]
    raw = [rng.randint(0, 9) for _ in range(k - 1)] + [rng.randint(1, 9)]
    return _normalised(bps, raw)


def skewed(rng: random.Random, n: int) -> ValuationDensity:
    """Nine tenths of the mass on one narrow window near the left end, the
    rest on one or both sides of it. Windows of different agents overlap
    often, which forces contests."""
    q = max(8, 4 * n)
    s = rng.randrange(min(q - 1, 3))
    a, b = Fraction(s, q), Fraction(s + 1, q)
    hot = Fraction(9, 10)
    left = rng.choice([ZERO, Fraction(1, 20), Fraction(1, 10)]) if a > 0 else ZERO
    bps, masses = [ZERO], []
    if a > 0:
        bps.append(a)
        masses.append(left)
    bps.append(b)
    masses.append(hot)
    bps.append(ONE)
    masses.append(ONE - hot - left)
    lengths = [y - x for x, y in zip(bps, bps[1:])]
    weights = [m / ln for m, ln in zip(masses[:-1], lengths)]
    done = sum((w * ln for w, ln in zip(weights, lengths)), ZERO)
    weights.append((ONE - done) / lengths[-1])
    return ValuationDensity(bps, weights)


def make_density(profile: str, rng: random.Random, n: int) -> ValuationDensity:
    if profile == "uniform":
        return ValuationDensity.uniform()
    if profile == "random-k-cells":
        return random_cells(rng)
    if profile == "adversarial-skew":
        return skewed(rng, n)
    raise InvalidFamily(f"unknown density profile {profile!r}; pick one of {', '.join(PROFILES)}")


def gen_instance(n: int, family: str, seed: int, profile: str = "uniform") -> Instance:
    """Deterministic for fixed arguments. Tree-shaped graphs get root 0 and
    the matching parent array."""
    if family not in FAMILIES:
        raise InvalidFamily(f"unknown graph family {family!r}; pick one of {', '.join(FAMILIES)}")
    if profile not in PROFILES:
        raise InvalidFamily(f"unknown density profile {profile!r}; pick one of {', '.join(PROFILES)}")
    rng = random.Random(f"{n}:{family}:{profile}:{seed}")
    graph = make_graph(n, family, rng)
    densities = [make_density(profile, rng, n) for _ in range(n)]
    meta = {"family": family, "profile": profile}
    root = parents = None
    if graph.is_tree():
        root = 0
        parents = list(RootedTree.from_graph(graph, 0).parent)
    return Instance(graph, densities, seed, meta, root, parents)
