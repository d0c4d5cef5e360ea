import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainbow_embed.errors import CapExceeded, GroupError
from rainbow_embed.groups import AbelianGroup, load_group_table, parse_group_spec


def test_cyclic_addition_wraps():
    z = AbelianGroup.cyclic(16)
    assert z.order == 16
    assert z.add(9, 10) == 3
    assert z.neg(5) == 11
    assert z.identity == 0


def test_product_group_digits():
    g = parse_group_spec("Z2xZ4")
    assert g.order == 8
    # element 5 = (1, 1); 5 + 5 = (0, 2) = 2
    assert g.add(5, 5) == 2
    assert all(g.add(a, g.neg(a)) == 0 for a in range(8))


def test_table_group_round_trip():
    z = AbelianGroup.cyclic(6)
    t = AbelianGroup.from_table(z.table)
    assert np.array_equal(t.table, z.table)
    assert t.add(4, 5) == 3


def test_table_rejects_non_commutative():
    # S_3 multiplication table is not commutative.
    import itertools

    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    table = [[idx[tuple(a[b[k]] for k in range(3))] for b in perms] for a in perms]
    with pytest.raises(GroupError, match="commutative"):
        AbelianGroup.from_table(table)


def test_table_rejects_missing_identity():
    with pytest.raises(GroupError):
        AbelianGroup.from_table([[1, 0], [0, 0]])


def test_table_rejects_non_associative():
    # A commutative loop of order 6 (Latin square with identity 0) that is not a group.
    table = [
        [0, 1, 2, 3, 4, 5],
        [1, 0, 3, 2, 5, 4],
        [2, 3, 4, 5, 0, 1],
        [3, 2, 5, 4, 1, 0],
        [4, 5, 0, 1, 3, 2],
        [5, 4, 1, 0, 2, 3],
    ]
    with pytest.raises(GroupError, match="associative"):
        AbelianGroup.from_table(table)


def test_cap():
    with pytest.raises(CapExceeded):
        AbelianGroup.cyclic(100, cap=50)


def test_load_group_table(tmp_path):
    z = AbelianGroup.cyclic(4)
    body = "order 4\n" + "\n".join(" ".join(str(x) for x in row) for row in z.table) + "\n"
    path = tmp_path / "z4.txt"
    path.write_text(body)
    g = load_group_table(path)
    assert g.order == 4
    assert parse_group_spec(str(path)).add(3, 3) == 2


@pytest.mark.parametrize("text", ["order\n", "order 2\n0 1\n", "order 2\n0 1\n1 x\n", "0 1\n1 0\n"])
def test_load_group_table_malformed(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(GroupError):
        load_group_table(path)


def test_parse_group_spec_unknown():
    with pytest.raises(GroupError):
        parse_group_spec("Q8")


@given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.data())
def test_group_axioms(factors, data):
    g = AbelianGroup.from_invariant_factors(factors)
    elem = st.integers(0, g.order - 1)
    a, b, c = data.draw(elem), data.draw(elem), data.draw(elem)
    assert g.add(a, b) == g.add(b, a)
    assert g.add(g.add(a, b), c) == g.add(a, g.add(b, c))
    assert g.add(a, g.identity) == a
    assert g.add(a, g.neg(a)) == g.identity
