import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainbow_embed.generators import (
    matching_instance,
    path_graph,
    rainbow_complete_bipartite,
    random_bipartite_host,
    random_matchings,
    random_regular_hypergraph,
    random_tree,
)
from rainbow_embed.graphcore import colouring_stats


@given(st.integers(0, 40), st.integers(2, 5), st.integers(0, 1000))
def test_random_tree_shape(edges, max_degree, seed):
    t = random_tree(edges, max_degree, seed)
    assert t.vertex_count == edges + 1
    assert t.edge_count == edges
    assert t.max_degree <= max_degree
    # A graph with n-1 edges is a tree iff it is connected.
    seen, stack = {0}, [0]
    while stack:
        for w in t.neighbours(stack.pop()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    assert len(seen) == t.vertex_count


def test_random_tree_rejects_impossible_degree():
    with pytest.raises(ValueError):
        random_tree(3, 1, 0)


def test_path_graph():
    p = path_graph(4)
    assert p.vertex_count == 5 and p.edge_count == 4 and p.max_degree == 2


def test_random_matchings_degree_and_sides():
    m = random_matchings(20, 3, 15, 1)
    assert m.edge_count == 45
    assert m.max_degree <= 3
    assert all(u < 20 <= v for u, v in m.edge_list())


def test_host_colourings():
    g = random_bipartite_host(30, 0.5, 0, "distance")
    assert colouring_stats(g).local_max <= 2
    assert colouring_stats(random_bipartite_host(30, 0.5, 0, "shift")).local_max == 1
    r = random_bipartite_host(30, 0.5, 0, "rainbow")
    assert len(r.colours) == r.edge_count
    with pytest.raises(ValueError):
        random_bipartite_host(5, 0.5, 0, "plaid")


def test_rainbow_complete_bipartite():
    g = rainbow_complete_bipartite(4)
    assert g.edge_count == 16 and len(g.colours) == 16


def test_matching_instance_is_seeded():
    a = matching_instance(20, 0.7, 5, size=8)
    b = matching_instance(20, 0.7, 5, size=8)
    assert np.array_equal(a.G.edges, b.G.edges)
    assert np.array_equal(a.H.edges, b.H.edges)
    assert a.r == 2


def test_regular_hypergraph_bounds():
    h = random_regular_hypergraph(300, 12, 0)
    deg = np.bincount(h.edges.ravel(), minlength=300)
    assert deg.max() <= 12
    assert deg.mean() > 11
    pairs = {}
    for row in h.edges.tolist():
        assert len(set(row)) == 3
        for i in range(3):
            for j in range(i + 1, 3):
                key = (row[i], row[j])
                pairs[key] = pairs.get(key, 0) + 1
    assert max(pairs.values()) <= 3
