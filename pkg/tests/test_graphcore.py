import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete_bipartite, complete_graph
from rainbow_embed.errors import DuplicateEdgeError, InstanceError, ParseError, PartitionError, SelfLoopError
from rainbow_embed.graphcore import (
    BlowUpInstance,
    ColouredGraph,
    GraphBuilder,
    boundedness_condition,
    colouring_stats,
    format_coloured_graph,
    is_colour_split,
    load_coloured_graph,
    parse_coloured_graph,
    partition_labels,
    save_coloured_graph,
)


# ---------------------------------------------------------------- parsing
def test_parse_two_edges_same_colour():
    g = parse_coloured_graph("vertices 3\n0 1 5\n1 2 5\n")
    assert g.vertex_count == 3
    assert g.edge_count == 2
    assert g.colour(0, 1) == g.colour(1, 2)
    assert g.label_of(g.colour(0, 1)) == 5


def test_parse_empty_edge_section():
    g = parse_coloured_graph("vertices 7\n")
    assert g.vertex_count == 7
    assert g.edge_count == 0


def test_parse_self_loop_rejected():
    with pytest.raises(SelfLoopError):
        parse_coloured_graph("vertices 3\n0 0 3\n")


def test_parse_duplicate_edge_rejected():
    with pytest.raises(DuplicateEdgeError) as info:
        parse_coloured_graph("vertices 3\n0 1 1\n1 0 2\n")
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text",
    ["", "0 1 2\n", "vertices x\n", "vertices 2\n0 1\n", "vertices 2\n0 5 1\n", "vertices 2\na b 1\n"],
)
def test_parse_malformed(text):
    with pytest.raises(ParseError):
        parse_coloured_graph(text)


def test_uncoloured_targets_allowed_when_requested():
    g = parse_coloured_graph("vertices 3\n0 1\n1 2\n", require_colours=False)
    assert g.edge_count == 2
    assert g.colours == ()


def test_comments_and_blank_lines_ignored():
    g = parse_coloured_graph("# host\n\nvertices 2\n# edge\n0 1 red\n")
    assert g.label_of(g.colour(0, 1)) == "red"


def test_round_trip_through_file(tmp_path, k5_distance):
    path = tmp_path / "k5.g"
    save_coloured_graph(k5_distance, path)
    again = load_coloured_graph(path)
    assert again == k5_distance
    assert format_coloured_graph(again) == path.read_text()


@given(
    st.integers(2, 12).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])
                    .map(lambda e: (min(e), max(e))), max_size=30),
            st.integers(0, 1000),
        )
    )
)
def test_format_parse_round_trip(data):
    n, edges, seed = data
    rng = np.random.default_rng(seed)
    edges = sorted(edges)
    g = ColouredGraph(n, edges, rng.integers(0, 5, len(edges)).tolist())
    assert parse_coloured_graph(format_coloured_graph(g)) == g


# ------------------------------------------------------------- structure
def test_constructor_normalises_orientation():
    g = ColouredGraph(3, [(2, 0), (1, 2)], [4, 4])
    assert g.edge_list() == [(0, 2), (1, 2)]
    assert g.has_edge(0, 2) and g.has_edge(2, 0)
    assert g.neighbours(2) == (0, 1)
    assert g.degree(2) == 2


def test_constructor_rejects_bad_edges():
    with pytest.raises(SelfLoopError):
        ColouredGraph(3, [(1, 1)])
    with pytest.raises(DuplicateEdgeError):
        ColouredGraph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        ColouredGraph(3, [(0, 3)])


def test_builder_matches_constructor():
    b = GraphBuilder()
    for _ in range(3):
        b.add_vertex()
    b.add_edge(0, 1, "a")
    b.add_edge(1, 2, "b")
    g = b.build()
    assert g.edge_count == 2
    assert g.colour(0, 1) != g.colour(1, 2)


# ------------------------------------------------------------ colour stats
def test_distance_k5_stats(k5_distance):
    s = colouring_stats(k5_distance)
    assert s.global_max == 5
    assert s.local_max == 2


def test_rainbow_stats():
    s = colouring_stats(complete_graph(6, "rainbow"))
    assert (s.global_max, s.local_max, s.codegree) == (1, 1, 0)


def test_monochromatic_triangle_stats():
    s = colouring_stats(complete_graph(3, "mono"))
    assert s.global_max == 3
    assert s.local_max == 2


def test_set_colouring_codegree():
    g = ColouredGraph(4, [(0, 1), (2, 3), (0, 2)], [(1, 2), (1, 2), (1, 3)])
    assert colouring_stats(g).codegree == 2


# ------------------------------------------------------------ colour split
def test_private_palettes_are_split():
    parts = [[0, 1], [2, 3], [4, 5]]
    edges = [(0, 2), (1, 3), (0, 4), (2, 5)]
    g = ColouredGraph(6, edges, [0, 0, 1, 2])
    assert is_colour_split(g, parts)


def test_colour_in_two_pairs_is_not_split():
    parts = [[0, 1], [2, 3], [4, 5]]
    g = ColouredGraph(6, [(0, 2), (1, 4)], [7, 7])
    assert not is_colour_split(g, parts)
    assert colouring_stats(g, parts).split_violations == 1


def test_edgeless_graph_is_split():
    assert is_colour_split(ColouredGraph(4), [[0, 1], [2, 3]])


def test_partition_labels_rejects_overlap_and_gaps():
    with pytest.raises(PartitionError):
        partition_labels(3, [[0, 1], [1, 2]])
    with pytest.raises(PartitionError):
        partition_labels(3, [[0], [1]])
    assert partition_labels(3, [[0], [1]], cover=False).tolist() == [0, 1, -1]


# ---------------------------------------------------------------- instances
def _two_clusters(n):
    return [list(range(n)), list(range(n, 2 * n))]


def test_instance_rejects_dependent_cluster():
    H = ColouredGraph(4, [(0, 1)])
    G = complete_bipartite(2, 2)
    with pytest.raises(InstanceError):
        BlowUpInstance(H, G, [[0, 1], [2, 3]], [[0, 1], [2, 3]])


def test_instance_rejects_size_mismatch():
    H = ColouredGraph(4)
    G = ColouredGraph(4)
    with pytest.raises(InstanceError):
        BlowUpInstance(H, G, [[0], [1, 2, 3]], [[0, 1], [2, 3]])


def test_boundedness_empty_h_passes_with_zero():
    n = 5
    G = complete_bipartite(n, n, "rainbow")
    inst = BlowUpInstance(ColouredGraph(2 * n), G, _two_clusters(n), _two_clusters(n))
    rep = boundedness_condition(inst)
    assert rep.passed
    assert all(row.value == 0 for row in rep.rows)


def test_boundedness_monochromatic_complete_pair_fails():
    n = 6
    G = ColouredGraph(2 * n, [(i, n + j) for i in range(n) for j in range(n)], [0] * n * n)
    H = ColouredGraph(2 * n, [(i, n + i) for i in range(n)])
    inst = BlowUpInstance(H, G, _two_clusters(n), _two_clusters(n), d=1.0, gamma=0.1)
    rep = boundedness_condition(inst)
    assert rep.rows[0].value == n**3
    assert not rep.passed
    assert rep.worst.colour == 0


def test_boundedness_direct_formula():
    n = 20
    edges = [(i, n + i) for i in range(10)] + [(i, n + (i + 1) % n) for i in range(n)]
    colours = [0] * 10 + list(range(1, n + 1))
    G = ColouredGraph(2 * n, edges, colours)
    H = ColouredGraph(2 * n, [(i, n + i) for i in range(7)])
    inst = BlowUpInstance(H, G, _two_clusters(n), _two_clusters(n), d=0.5, gamma=0.1)
    rep = boundedness_condition(inst)
    row = next(r for r in rep.rows if r.colour == 0)
    assert row.value == 70
    assert rep.limit == pytest.approx(180)
    assert row.passed
