import itertools

import pytest
from hypothesis import given, strategies as st

from horosol.errors import ValidationError
from horosol.finite_groups import AffineGroup, CyclicGroup, PermutationGroup, group_from_descriptor


def _elements(G):
    if hasattr(G, "elements"):
        return [G.validate(x) for x in G.elements()]
    return [G.element(i) for i in range(G.order())]


GROUPS = [CyclicGroup(6), PermutationGroup(3), AffineGroup(3, 2)]


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: type(g).__name__)
def test_group_axioms_exhaustive(G):
    els = _elements(G)
    assert len(els) == G.order()
    assert [G.element(G.index(x)) for x in els] == els
    e = G.identity
    for x in els:
        assert G.mul(x, e) == x and G.mul(e, x) == x
        assert G.mul(x, G.inv(x)) == e
    for x, y, z in itertools.islice(itertools.product(els, repeat=3), 2000):
        assert G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z))


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: type(g).__name__)
def test_descriptor_roundtrip(G):
    H = group_from_descriptor(G.descriptor())
    assert H.order() == G.order()
    assert _elements(H) == _elements(G)


def test_affine_group_order_and_action():
    G = AffineGroup(5, 1)
    assert G.order() == 20  # units times translations
    f = (2, 1)
    assert [G.act(f, x) for x in range(5)] == [(2 * x + 1) % 5 for x in range(5)]
    with pytest.raises(ValidationError):
        G.validate((5, 0))


def test_unknown_descriptor():
    with pytest.raises(ValidationError):
        group_from_descriptor({"kind": "nope"})


@given(st.integers(2, 30), st.integers(0, 100), st.integers(0, 100))
def test_cyclic_group_is_addition(m, a, b):
    G = CyclicGroup(m)
    assert G.mul(a % m, b % m) == (a + b) % m
