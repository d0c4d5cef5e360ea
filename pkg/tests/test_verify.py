import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete_graph
from rainbow_embed.errors import CapExceeded
from rainbow_embed.graphcore import ColouredGraph
from rainbow_embed.groups import AbelianGroup
from rainbow_embed.verify import (
    check_embedding,
    check_harmonious,
    check_odc,
    check_packing,
    check_rainbow,
    copy_edges,
    exhaustive_rainbow_search,
)

TRIANGLE = ColouredGraph(3, [(0, 1), (1, 2), (0, 2)])
PATH2 = ColouredGraph(3, [(0, 1), (1, 2)])


# -------------------------------------------------------------- embedding
def test_identity_embedding_ok(k5_distance):
    v = check_embedding(k5_distance, k5_distance, {i: i for i in range(5)})
    assert v.ok and v.violations == ()


def test_injectivity_violation_names_pair():
    G = complete_graph(4)
    v = check_embedding(PATH2, G, {0: 0, 1: 1, 2: 0})
    assert not v.ok
    kinds = {x.kind: x.witness for x in v.violations}
    assert kinds["injectivity"] == (0, 2, 0)


def test_non_edge_violation_names_edge():
    G = ColouredGraph(4, [(0, 1)])
    v = check_embedding(PATH2, G, {0: 0, 1: 1, 2: 2})
    assert [x.kind for x in v.violations] == ["non-edge"]
    assert v.violations[0].witness == ((1, 2), (1, 2))


def test_undefined_vertex_reported():
    v = check_embedding(PATH2, complete_graph(3), {0: 0, 1: 1})
    assert any(x.kind == "undefined" for x in v.violations)


# ---------------------------------------------------------------- rainbow
def test_single_edge_always_rainbow():
    H = ColouredGraph(2, [(0, 1)])
    G = complete_graph(4, "mono")
    for u, w in itertools.permutations(range(4), 2):
        assert check_rainbow(G, {0: u, 1: w}, H).ok


def test_colour_clash_detected():
    G = ColouredGraph(3, [(0, 1), (1, 2)], [7, 7])
    v = check_rainbow(G, {0: 0, 1: 1, 2: 2}, PATH2)
    assert not v.ok
    assert v.violations[0].kind == "colour-clash"
    assert v.violations[0].witness[0] == 7


def test_set_colours_must_be_disjoint():
    G = ColouredGraph(3, [(0, 1), (1, 2)], [(1, 2), (2, 3)])
    assert not check_rainbow(G, [0, 1, 2], PATH2).ok


@given(st.permutations(range(6)))
def test_rainbow_host_accepts_any_embedding(perm):
    G = complete_graph(6, "rainbow")
    H = ColouredGraph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5)])
    phi = dict(enumerate(perm))
    assert check_embedding(H, G, phi).ok
    assert check_rainbow(G, phi, H).ok


# ---------------------------------------------------------------- packing
def test_shared_edge_violation():
    G = complete_graph(4)
    v = check_packing([[(0, 1), (1, 2)], [(2, 1), (2, 3)]], G)
    assert not v.ok
    assert v.violations[0].kind == "shared-edge"
    assert v.violations[0].witness == (0, 1, (1, 2))


def test_rotation_family_is_decomposition():
    G = complete_graph(5)
    base = [(0, 1), (1, 3)]
    copies = [[((u + s) % 5, (w + s) % 5) for u, w in base] for s in range(5)]
    v = check_packing(copies, G)
    assert v.ok and v.coverage


def test_empty_family():
    v = check_packing([], complete_graph(3))
    assert v.ok and v.coverage is False


def test_packing_edge_outside_host():
    v = check_packing([[(0, 2)]], ColouredGraph(3, [(0, 1)]))
    assert v.violations[0].kind == "not-in-host"


# -------------------------------------------------------------------- ODC
def test_edge_in_three_copies():
    G = complete_graph(4)
    v = check_odc([[(0, 1)], [(0, 1)], [(1, 0)]], G)
    assert any(x.kind == "multiplicity" for x in v.violations)


def test_two_copies_sharing_two_edges():
    G = complete_graph(4)
    v = check_odc([[(0, 1), (2, 3)], [(0, 1), (2, 3)]], G)
    assert [x.kind for x in v.violations] == ["pair-overlap"]


def test_double_edge_k1_ok():
    G = complete_graph(2)
    assert check_odc([[(0, 1)], [(1, 0)]], G).ok


# ------------------------------------------------------------- harmonious
def test_star_into_z5():
    star = ColouredGraph(4, [(0, 1), (0, 2), (0, 3)])
    v = check_harmonious(star, {0: 0, 1: 1, 2: 2, 3: 3}, AbelianGroup.cyclic(5))
    assert v.ok


def test_duplicate_label():
    v = check_harmonious(PATH2, {0: 0, 1: 1, 2: 0}, AbelianGroup.cyclic(5))
    assert any(x.kind == "label-collision" for x in v.violations)


def test_duplicate_sum():
    # 0+3 = 1+2 in Z_5
    H = ColouredGraph(4, [(0, 1), (2, 3)])
    v = check_harmonious(H, {0: 0, 1: 3, 2: 1, 3: 2}, AbelianGroup.cyclic(5))
    assert [x.kind for x in v.violations] == ["sum-collision"]


def test_harmonious_accepts_raw_table():
    table = AbelianGroup.cyclic(5).table.tolist()
    star = ColouredGraph(4, [(0, 1), (0, 2), (0, 3)])
    assert check_harmonious(star, [0, 1, 2, 3], table).ok


# ------------------------------------------------------------- exhaustive
def test_exhaustive_k2():
    H = ColouredGraph(2, [(0, 1)])
    G = ColouredGraph(2, [(0, 1)], [0])
    phi = exhaustive_rainbow_search(H, G)
    assert phi is not None and check_embedding(H, G, phi).ok


def test_exhaustive_mono_triangle_none():
    assert exhaustive_rainbow_search(TRIANGLE, complete_graph(3, "mono")) is None


def test_exhaustive_cap():
    with pytest.raises(CapExceeded):
        exhaustive_rainbow_search(complete_graph(5), complete_graph(8, "mono"), cap=50)


def test_exhaustive_respects_clusters():
    H = ColouredGraph(4, [(0, 2), (1, 3)])
    G = ColouredGraph(4, [(0, 2), (1, 3), (0, 3), (1, 2)], [0, 1, 1, 1])
    phi = exhaustive_rainbow_search(H, G, ([[0, 1], [2, 3]], [[0, 1], [2, 3]]))
    assert phi is not None
    assert {phi[0], phi[1]} == {0, 1}
    assert check_rainbow(G, phi, H).ok


def _brute_force(H, G):
    for perm in itertools.permutations(range(G.vertex_count), H.vertex_count):
        if check_embedding(H, G, perm).ok and check_rainbow(G, perm, H).ok:
            return True
    return False


@given(st.integers(0, 10_000))
def test_exhaustive_agrees_with_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.7]
    G = ColouredGraph(n, edges, rng.integers(0, 3, len(edges)).tolist())
    h_edges = [(i, j) for i in range(3) for j in range(i + 1, 3) if rng.random() < 0.7]
    H = ColouredGraph(3, h_edges)
    phi = exhaustive_rainbow_search(H, G)
    assert (phi is not None) == _brute_force(H, G)
    if phi is not None:
        assert check_embedding(H, G, phi).ok and check_rainbow(G, phi, H).ok


def test_copy_edges_canonical():
    assert copy_edges(PATH2, {0: 2, 1: 0, 2: 1}) == [(0, 2), (0, 1)]
