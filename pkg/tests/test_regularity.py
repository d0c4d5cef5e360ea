from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete_bipartite, complete_graph
from rainbow_embed.generators import random_bipartite_host
from rainbow_embed.graphcore import ColouredGraph
from rainbow_embed.regularity import (
    RegularityParams,
    check_pair_degree_regularity,
    check_quasirandom,
    check_super_regular_sampled,
    density,
    regularity_gate,
)


def two_cliques(n: int) -> ColouredGraph:
    h = n // 2
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if (i < h) == (j < h)]
    return ColouredGraph(n, edges)


# ---------------------------------------------------------------- density
def test_density_complete_bipartite():
    g = complete_bipartite(3, 4)
    assert density(g, [0, 1, 2], [3, 4, 5, 6]) == 1


def test_density_no_edges():
    g = ColouredGraph(4, [(0, 1)])
    assert density(g, [0, 1], [2, 3]) == 0


def test_density_k4_halves():
    assert density(complete_graph(4), [0, 1], [2, 3]) == Fraction(4, 4)


def test_density_is_exact_fraction():
    g = ColouredGraph(4, [(0, 2)])
    assert density(g, [0, 1], [2, 3]) == Fraction(1, 4)


# ----------------------------------------------------- super-regular check
@pytest.mark.parametrize("eps", [0.05, 0.1, 0.3, 1.0])
def test_complete_bipartite_passes(eps):
    g = complete_bipartite(20, 20)
    v = check_super_regular_sampled(g, range(20), range(20, 40), RegularityParams(eps, 1.0, 16))
    assert v.passed
    assert v.worst_pair_density == 1.0
    assert v.degree_range == (1.0, 1.0)


def test_isolated_vertex_is_witness():
    n = 30
    g = random_bipartite_host(n, 0.5, 1, "rainbow")
    edges = [e for e in g.edge_list() if e[0] != 0]
    g = ColouredGraph(2 * n, edges)
    v = check_super_regular_sampled(g, range(n), range(n, 2 * n), RegularityParams(0.1, 0.5, 8))
    assert not v.passed
    assert any(w.kind == "degree" and w.left == (0,) and w.value == 0 for w in v.witnesses)


def test_sides_must_reach_one_over_eps():
    g = complete_bipartite(5, 5)
    with pytest.raises(ValueError):
        check_super_regular_sampled(g, range(5), range(5, 10), RegularityParams(0.1, 1.0))
    assert regularity_gate(g, list(range(5)), list(range(5, 10)), RegularityParams(0.1, 1.0)) is None


def test_random_pair_mostly_passes():
    passed = sum(
        check_super_regular_sampled(
            random_bipartite_host(300, 0.5, s, "rainbow"), range(300), range(300, 600),
            RegularityParams(0.15, 0.5, 32, s),
        ).passed
        for s in range(10)
    )
    assert passed >= 9


def test_sampled_check_deterministic():
    g = random_bipartite_host(40, 0.5, 3, "rainbow")
    p = RegularityParams(0.1, 0.5, 16, 7)
    assert check_super_regular_sampled(g, range(40), range(40, 80), p) == check_super_regular_sampled(
        g, range(40), range(40, 80), p
    )


@pytest.mark.parametrize("kwargs", [dict(eps=0), dict(eps=1.5), dict(d=-0.1), dict(sample_count=0)])
def test_params_validated(kwargs):
    base = dict(eps=0.1, d=0.5, sample_count=4)
    base.update(kwargs)
    with pytest.raises(ValueError):
        RegularityParams(**base)


# ---------------------------------------------------- pair-degree criterion
def test_pair_degree_complete():
    g = complete_bipartite(10, 10)
    assert check_pair_degree_regularity(g, range(10), range(10, 20), 0.1, 1.0)
    assert check_pair_degree_regularity(g, range(10), range(10, 20), 0.1, 0.9)


def test_pair_degree_empty():
    g = ColouredGraph(20)
    assert not check_pair_degree_regularity(g, range(10), range(10, 20), 0.1, 0.5)


def test_pair_degree_half_complete():
    n = 20
    edges = [(a, n + b) for a in range(n) for b in range(n) if (b < n // 2) == (a % 2 == 0)]
    g = ColouredGraph(2 * n, edges)
    assert not check_pair_degree_regularity(g, range(n), range(n, 2 * n), 0.01, 0.5)


def test_pair_degree_needs_two_vertices():
    with pytest.raises(ValueError):
        check_pair_degree_regularity(complete_bipartite(1, 3), [0], [1, 2, 3], 0.1, 0.5)


# -------------------------------------------------------- quasirandomness
@pytest.mark.parametrize("n", [10, 20, 41])
def test_complete_graph_quasirandom(n):
    v = check_quasirandom(complete_graph(n), 1 / n, (n - 1) / n, sample_count=16)
    assert v.passed


def test_two_cliques_fail_with_witness():
    v = check_quasirandom(two_cliques(40), 0.05, 0.5, sample_count=32)
    assert not v.passed
    dens = [w for w in v.witnesses if w.kind == "density"]
    assert dens and all(w.value in (0.0, 1.0) for w in dens)


def test_gnp_quasirandom_mostly_passes():
    passed = 0
    for s in range(20):
        rng = np.random.default_rng(s)
        n = 400
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < 0.5
        g = ColouredGraph(n, np.stack([iu[0][keep], iu[1][keep]], axis=1))
        passed += check_quasirandom(g, 0.1, 0.5, sample_count=16, rng_seed=s).passed
    assert passed >= 18


def test_quasirandom_needs_enough_vertices():
    with pytest.raises(ValueError):
        check_quasirandom(complete_graph(5), 0.1, 0.8)


@given(st.integers(10, 30), st.floats(0.05, 0.5))
def test_witness_densities_violate_tolerance(n, eps):
    g = two_cliques(2 * n)
    v = check_quasirandom(g, eps, 0.5, sample_count=8)
    for w in v.witnesses:
        if w.kind == "density":
            assert abs(w.value - 0.5) > eps
            assert set(w.left).isdisjoint(w.right)
