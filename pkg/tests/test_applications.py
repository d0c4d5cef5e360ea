import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete_graph
from rainbow_embed.applications import (
    bipartite_packing,
    cyclic_packing,
    distance_colouring,
    enumerate_group,
    harmonious_labelling,
    odc_cover,
    orbit_colouring,
    rotation,
)
from rainbow_embed.errors import GateError, GroupError, InstanceError
from rainbow_embed.generators import path_graph
from rainbow_embed.graphcore import ColouredGraph, colouring_stats
from rainbow_embed.groups import AbelianGroup
from rainbow_embed.pipeline import PipelineConfig
from rainbow_embed.verify import check_harmonious, check_odc, check_rainbow, copy_edges


def _partition(g):
    classes = {}
    for e, cs in zip(map(tuple, g.edge_list()), g.edge_colours):
        classes.setdefault(cs[0], set()).add(e)
    return {frozenset(c) for c in classes.values()}


# ------------------------------------------------------------ colourings
def test_distance_colouring_k5():
    g = distance_colouring(5)
    assert g.edge_count == 10
    assert g.edge_colours[list(map(tuple, g.edge_list())).index((0, 2))] == (2,)
    counts = np.bincount(g.edge_colour_array)
    assert sorted(c for c in counts if c) == [5, 5]


def test_distance_colouring_k7_locally_two_bounded():
    stats = colouring_stats(distance_colouring(7))
    assert stats.local_max == 2
    assert len(distance_colouring(7).colours) == 3


def test_distance_colouring_k4():
    g = distance_colouring(4)
    assert set(g.colours) == {1, 2}
    assert int((g.edge_colour_array == 2).sum()) == 2


def test_distance_colouring_rejects_small_n():
    with pytest.raises(ValueError):
        distance_colouring(2)


def test_rotation_orbits_of_k5_match_distance():
    g, action = orbit_colouring(complete_graph(5), [rotation(5)])
    assert _partition(g) == _partition(distance_colouring(5))
    assert action.order == 5


def test_identity_group_gives_rainbow():
    g, action = orbit_colouring(complete_graph(6), [tuple(range(6))])
    assert action.order == 1
    assert len(g.colours) == g.edge_count


def test_k4_rotation_has_short_orbit():
    g, action = orbit_colouring(complete_graph(4), [rotation(4)])
    assert sorted(action.orbit_sizes.values()) == [2, 4]
    with pytest.raises(GroupError):
        orbit_colouring(complete_graph(4), [rotation(4)], full_orbits=True)


def test_non_automorphism_rejected():
    path = ColouredGraph(3, [(0, 1), (1, 2)])
    with pytest.raises(GroupError):
        orbit_colouring(path, [(1, 0, 2)])


def test_group_enumeration_closed_with_identity():
    elements = enumerate_group([rotation(6), (0, 5, 4, 3, 2, 1)], 6)
    assert len(elements) == 12
    assert tuple(range(6)) in elements
    ids = set(elements)
    for p, q in itertools.product(elements, repeat=2):
        assert tuple(p[q[i]] for i in range(6)) in ids


@given(st.integers(5, 12), st.data())
def test_orbit_ids_invariant_under_group(n, data):
    g, action = orbit_colouring(complete_graph(n), [rotation(n, 2)])
    p = data.draw(st.sampled_from(action.elements))
    e = data.draw(st.sampled_from([tuple(x) for x in g.edge_list()]))
    assert action.orbit_of_edge[action.apply(p, e)] == action.orbit_of_edge[e]


# -------------------------------------------------------------- packings
def test_cyclic_packing_path_decomposes_k5():
    res = cyclic_packing(path_graph(2), 5)
    assert len(res.copies) == 5
    assert res.verdict.ok and res.decomposition and res.verdict.coverage
    assert check_rainbow(res.host, res.base_copy, path_graph(2)).ok


def test_cyclic_packing_single_edge():
    res = cyclic_packing(path_graph(1), 5, PipelineConfig(app_slack=0.0))
    edges = {frozenset(e) for es in res.edge_sets(path_graph(1)) for e in es}
    assert len(edges) == 5
    assert res.verdict.ok


def test_cyclic_packing_even_n_drops_antipodal_edges():
    res = cyclic_packing(path_graph(2), 8)
    assert res.host.edge_count == 28 - 4
    assert res.verdict.ok and len(res.copies) == 8


def test_cyclic_packing_slack_gate():
    with pytest.raises(GateError):
        cyclic_packing(path_graph(3), 5)


def test_bipartite_packing_single_edge_is_perfect_matching():
    H = path_graph(1)
    res = bipartite_packing(H, 6)
    edges = [tuple(sorted(e)) for es in res.edge_sets(H) for e in es]
    assert len(edges) == len(set(edges)) == 6
    assert sorted(v for e in edges for v in e) == list(range(12))


def test_bipartite_packing_two_edge_path():
    H = path_graph(2)
    res = bipartite_packing(H, 3)
    covered = {tuple(sorted(e)) for es in res.edge_sets(H) for e in es}
    assert len(covered) == 6
    assert res.verdict.ok and not res.decomposition
    assert colouring_stats(res.host).local_max == 1


def test_bipartite_packing_rejects_n_edges():
    with pytest.raises(GateError):
        bipartite_packing(path_graph(3), 3)


def test_bipartite_packing_rejects_odd_cycle():
    with pytest.raises(InstanceError):
        bipartite_packing(ColouredGraph(3, [(0, 1), (1, 2), (0, 2)]), 4)


# ------------------------------------------------------------------- odc
def test_odc_single_edge_k1():
    res = odc_cover(path_graph(1), 1)
    assert len(res.copies) == 2
    sets = [copy_edges(path_graph(1), c) for c in res.copies]
    assert {frozenset(s[0]) for s in sets} == {frozenset((0, 1))}
    assert res.multiplicity == {0: 0, 2: 1}
    assert res.verdict.ok


def test_odc_path_k4():
    H = path_graph(12)
    res = odc_cover(H, 4, PipelineConfig(rng_seed=1))
    assert len(res.copies) == 16
    assert check_odc([copy_edges(H, c) for c in res.copies], res.host).ok
    assert sum(res.multiplicity.values()) == res.host.edge_count


def test_odc_translates_keep_colours():
    res = odc_cover(path_graph(3), 3)
    H = path_graph(3)
    base = sorted(res.host.colour_matrix[res.base_copy[u], res.base_copy[v]] for u, v in H.edge_list())
    for c in res.copies:
        assert sorted(res.host.colour_matrix[c[u], c[v]] for u, v in H.edge_list()) == base


def test_odc_rejects_bad_k():
    with pytest.raises(ValueError):
        odc_cover(path_graph(1), 0)


# ------------------------------------------------------------ harmonious
def test_star_into_z5():
    H = ColouredGraph(4, [(0, 1), (0, 2), (0, 3)])
    z5 = AbelianGroup.cyclic(5)
    assert check_harmonious(H, {0: 0, 1: 1, 2: 2, 3: 3}, z5).ok
    res = harmonious_labelling(H, z5)
    assert res.verdict.ok
    assert len(set(res.labelling.values())) == 4


def test_single_edge_into_z2():
    res = harmonious_labelling(path_graph(1), AbelianGroup.cyclic(2))
    assert res.labelling == {0: 0, 1: 1}
    assert res.verdict.ok


def test_too_many_edges_rejected():
    with pytest.raises(GateError):
        harmonious_labelling(complete_graph(4), AbelianGroup.cyclic(4))


def test_labelling_in_non_cyclic_group():
    g = AbelianGroup.from_invariant_factors([2, 2, 4])
    H = path_graph(8)
    res = harmonious_labelling(H, g, PipelineConfig(rng_seed=2))
    assert check_harmonious(H, res.labelling, g).ok
