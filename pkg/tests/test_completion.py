import numpy as np
import pytest

from conftest import complete_bipartite
from rainbow_embed.errors import RetriesExhausted
from rainbow_embed.generators import matching_instance
from rainbow_embed.graphcore import BlowUpInstance, ColouredGraph
from rainbow_embed.pipeline import PipelineConfig, approx_embed_round, complete_embedding, init_engine
from rainbow_embed.verify import check_embedding, check_rainbow

CFG = PipelineConfig(gamma=0.3, mu=0.2)


def _halves(n):
    return [list(range(n)), list(range(n, 2 * n))]


def _run_rounds(inst, seed, cfg=CFG):
    state = init_engine(inst, cfg.gamma, seed)
    sched = cfg.schedule(inst.r)
    for t in range(inst.r):
        approx_embed_round(state, t, cfg, sched[t], sched[t + 1], seed + t)
    return state


def _assert_valid(inst, phi):
    assignment = {x: int(phi[x]) for x in range(inst.H.vertex_count)}
    assert check_embedding(inst.H, inst.G, assignment).ok
    assert check_rainbow(inst.G, assignment, inst.H).ok
    for x, v in assignment.items():
        assert inst.g_cluster[v] == inst.h_cluster[x]


def test_edgeless_h_completes_without_search():
    n = 6
    H = ColouredGraph(2 * n, [])
    inst = BlowUpInstance(H, complete_bipartite(n, n, "rainbow"), _halves(n), _halves(n), d=1.0)
    state = init_engine(inst, 0.1, 0)
    phi, rep = complete_embedding(state, mu=0.05, seed=0)
    assert (phi >= 0).all()
    assert sorted(phi.tolist()) == list(range(2 * n))
    assert rep.nodes <= 1


def test_no_leftovers_still_builds_reservoir():
    n = 10
    H = ColouredGraph(2 * n, [(i, n + i) for i in range(n)])
    inst = BlowUpInstance(H, complete_bipartite(n, n, "rainbow"), _halves(n), _halves(n), d=1.0)
    state = _run_rounds(inst, 0, PipelineConfig(gamma=0.1, mu=0.05))
    phi, rep = complete_embedding(state, mu=0.2, seed=0)
    assert all(v >= 2 for v in rep.reservoir_size.values())
    _assert_valid(inst, phi)


def test_pigeonhole_cut_fails_fast():
    # 40 shift colours cannot cover 80 edges.
    inst = matching_instance(40, 0.6, 0, count=2, colouring="shift")
    state = _run_rounds(inst, 0)
    with pytest.raises(RetriesExhausted) as info:
        complete_embedding(state, mu=0.2, seed=0, restarts=3)
    assert info.value.stage == "completion"
    assert all(a["nodes"] == 0 for a in info.value.details["attempts"])


@pytest.mark.parametrize("colouring,size", [("distance", 10), ("rainbow", None)])
def test_two_cluster_completion_success_rate(colouring, size):
    ok = 0
    for seed in range(20):
        inst = matching_instance(40, 0.6, seed, count=2, size=size, colouring=colouring)
        state = _run_rounds(inst, seed)
        try:
            phi, _ = complete_embedding(state, mu=0.2, seed=seed, restarts=5)
        except RetriesExhausted:
            continue
        _assert_valid(inst, phi)
        ok += 1
    assert ok >= 16


def test_completion_is_deterministic():
    inst = matching_instance(40, 0.6, 3, count=2, size=10)
    a, _ = complete_embedding(_run_rounds(inst, 3), mu=0.2, seed=3)
    b, _ = complete_embedding(_run_rounds(inst, 3), mu=0.2, seed=3)
    assert np.array_equal(a, b)


def test_layer_policy_strict_reported():
    inst = matching_instance(40, 0.6, 1, count=2, size=10)
    state = _run_rounds(inst, 1)
    try:
        _, rep = complete_embedding(state, mu=0.2, seed=1, layer_policy="strict")
    except RetriesExhausted as exc:
        assert {a["layer"] for a in exc.details["attempts"]} == {"strict"}
    else:
        assert rep.layer == "strict"
