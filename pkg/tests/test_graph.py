import pytest
from hypothesis import given
from hypothesis import strategies as st

from localcake.errors import InvalidGraph, UnknownAgent
from localcake.graph import RootedTree, SocialGraph

PATH3 = SocialGraph(3, [(0, 1), (1, 2)])
PATH4 = SocialGraph(4, [(0, 1), (1, 2), (2, 3)])
PATH5 = SocialGraph(5, [(i, i + 1) for i in range(4)])
CYCLE4 = SocialGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
K4 = SocialGraph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
STAR = SocialGraph(5, [(0, i) for i in range(1, 5)])


def test_neighbours_and_degree():
    assert PATH3.neighbors(1) == (0, 2)
    assert PATH3.degree(0) == 1
    assert all(K4.degree(v) == 3 for v in K4.agents)


def test_unknown_agent():
    with pytest.raises(UnknownAgent):
        PATH3.neighbors(3)
    with pytest.raises(UnknownAgent):
        PATH3.degree(-1)


def test_construction_errors():
    with pytest.raises(InvalidGraph):
        SocialGraph(3, [(0, 1)])
    with pytest.raises(InvalidGraph):
        SocialGraph(2, [(0, 0), (0, 1)])
    with pytest.raises(InvalidGraph):
        SocialGraph(2, [(0, 2)])
    with pytest.raises(InvalidGraph):
        SocialGraph(0)


def test_shortest_paths():
    assert PATH4.shortest_path(0, 3) == [0, 1, 2, 3]
    assert CYCLE4.shortest_path(0, 2) == [0, 1, 2]
    assert K4.shortest_path(0, 3) == [0, 3]


def test_centres():
    assert PATH5.center_vertex() == 2
    assert STAR.center_vertex() == 0
    assert K4.center_vertex() == 0


def test_dict_roundtrip():
    assert SocialGraph.from_dict(CYCLE4.to_dict()) == CYCLE4


def test_rooted_tree():
    t = RootedTree.from_graph(PATH4, 1)
    assert t.root == 1
    assert t.parent == (1, None, 1, 2)
    assert t.children[1] == (0, 2)
    assert t.subtree_size == (1, 4, 2, 1)
    assert t.descendants(1) == [0, 2, 3]
    assert t.bfs_order() == (1, 0, 2, 3)
    assert t.to_graph() == PATH4
    with pytest.raises(InvalidGraph):
        RootedTree([None, 2, 1])
    with pytest.raises(InvalidGraph):
        RootedTree.from_graph(CYCLE4, 0)


@st.composite
def connected_graphs(draw):
    n = draw(st.integers(1, 9))
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    edges += [(a, b) for a, b in extra if a != b]
    return SocialGraph(n, edges)


@given(connected_graphs(), st.data())
def test_shortest_path_properties(g, data):
    u = data.draw(st.integers(0, g.n - 1))
    r = data.draw(st.integers(0, g.n - 1))
    path = g.shortest_path(u, r)
    assert path[0] == u and path[-1] == r
    assert len(path) - 1 == g.distances(r)[u]
    assert all(g.adjacent(a, b) for a, b in zip(path, path[1:]))
    # vertices more than two steps apart along a shortest path share no neighbour
    for i in range(len(path)):
        for j in range(i + 3, len(path)):
            assert not set(g.neighbors(path[i])) & set(g.neighbors(path[j]))


@given(connected_graphs())
def test_centre_properties(g):
    c = g.center_vertex()
    assert g.eccentricity(c) == g.radius()
    assert g.eccentricity(c) <= g.n // 2
    assert sorted(g.bfs_order(c)) == list(g.agents)
    if g.is_tree():
        assert g.eccentricity(c) == -(-g.diameter() // 2)


def test_centre_can_exceed_half_diameter():
    # radius 3, diameter 4: the half-diameter bound is a tree fact only
    g = SocialGraph(7, [(0, 1), (0, 2), (0, 4), (1, 3), (2, 5), (3, 6), (5, 6)])
    assert g.radius() == 3 and g.diameter() == 4
    assert g.eccentricity(g.center_vertex()) <= g.n // 2


@given(connected_graphs())
def test_symmetric_adjacency(g):
    for v in g.agents:
        for u in g.neighbors(v):
            assert v in g.neighbors(u)
            assert u != v
