import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainbow_embed.pipeline import CandidacyGraph, pad_colour_sets


def test_complete_candidacy():
    a = CandidacyGraph.complete([0, 1, 2], [5, 6, 7])
    assert a.edge_count == 9
    assert a.density() == 1.0
    assert a.capacity == 0


def test_pad_nothing_when_t_zero():
    a = CandidacyGraph.complete([0, 1], [2, 3])
    b = pad_colour_sets(a, 0)
    assert np.array_equal(b.mask, a.mask)
    assert (b.set_sizes() == 0).all()


def test_pad_one_colour_to_three():
    a = CandidacyGraph.complete([0], [1], capacity=1)
    a.slots[0, 0, 0] = 4
    b = pad_colour_sets(a, 3)
    cs = b.colour_set(0, 0)
    assert len(cs) == 3
    assert 4 in cs
    dummies = [c for c in cs if c >= b.dummy_from]
    assert len(dummies) == 2
    assert b.dummy_from == 5


def test_padded_dummies_are_fresh_and_disjoint():
    a = CandidacyGraph.complete([0, 1], [2, 3], capacity=1)
    a.slots[:, :, 0] = [[1, 2], [3, -1]]
    b = pad_colour_sets(a, 2)
    sets = [set(b.colour_set(i, j)) for i in range(2) for j in range(2)]
    dummies = [s - {1, 2, 3} for s in sets]
    for x in range(4):
        for y in range(x + 1, 4):
            assert not dummies[x] & dummies[y]
    assert all(len(s) == 2 for s in sets)


def test_pad_rejects_oversized_sets():
    a = CandidacyGraph.complete([0], [1], capacity=2)
    a.slots[0, 0] = [1, 2]
    with pytest.raises(ValueError):
        pad_colour_sets(a, 1)


def test_non_edges_stay_empty():
    a = CandidacyGraph.complete([0, 1], [2, 3])
    a.mask[0, 1] = False
    b = pad_colour_sets(a, 2, first_dummy=100)
    assert b.colour_set(0, 1) == ()
    assert min(b.colour_set(0, 0)) >= 100


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 4), st.integers(0, 1000))
def test_padding_properties(nl, nr, t, seed):
    rng = np.random.default_rng(seed)
    a = CandidacyGraph.complete(range(nl), range(nl, nl + nr), capacity=t)
    a.mask[:] = rng.random((nl, nr)) < 0.7
    for i in range(nl):
        for j in range(nr):
            k = int(rng.integers(0, t + 1))
            a.slots[i, j, :k] = rng.choice(20, size=k, replace=False)
    b = pad_colour_sets(a, t)
    real_max = int(a.slots.max(initial=-1))
    seen_dummies = []
    for i in range(nl):
        for j in range(nr):
            cs = b.colour_set(i, j)
            if not a.mask[i, j]:
                assert cs == ()
                continue
            assert len(cs) == t
            assert set(a.colour_set(i, j)) <= set(cs)
            seen_dummies += [c for c in cs if c > real_max]
    assert len(seen_dummies) == len(set(seen_dummies))
