import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from horosol.errors import ValidationError
from horosol.finite_groups import CyclicGroup, PermutationGroup
from horosol.group_core import (FiniteAssignment, IDENTITY, Presentation, Word, act_point, check_surface_relation,
                                commutator, evaluate, presentation_from_json, presentation_to_json,
                                reidemeister_schreier, schreier_tree, subgroup_membership, surface_group, word_perm)
from horosol.perm import is_transitive
from strategies import perm_tuple, words


# --- independent oracle: Stallings folding ---------------------------------------

def stallings_graph(basis, rank):
    """Fold the flower of ``basis`` words; returns (n_vertices, out-edges dict).

    Edges are read left to right from the base vertex; a word w acts on cosets
    as ``H w`` under this convention, so we fold the inverse words to match the
    left action used by the package.
    """
    parent = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    edges = []  # (u, letter>0 index, v)
    n = 1
    for w in basis:
        letters = list(w.inverse().letters)
        u = 0
        for k, l in enumerate(letters):
            v = 0 if k == len(letters) - 1 else n
            if v:
                n += 1
            if l > 0:
                edges.append((u, l - 1, v))
            else:
                edges.append((v, -l - 1, u))
            u = v
    changed = True
    while changed:
        changed = False
        fwd, bwd = {}, {}
        for a, i, b in edges:
            a, b = find(a), find(b)
            for table, key, other in ((fwd, (a, i), b), (bwd, (b, i), a)):
                if key in table and find(table[key]) != find(other):
                    x, y = sorted((find(table[key]), find(other)))
                    parent[y] = x
                    changed = True
                table.setdefault(key, other)
    verts = sorted({find(v) for e in edges for v in (e[0], e[2])} | {find(0)})
    out = {(find(a), i): find(b) for a, i, b in edges}
    return verts, out


def random_transitive_action(data, p, max_degree=6):
    d, perms = data
    assume(is_transitive(perms, d))
    return d, perms


# --- basic words ----------------------------------------------------------------

def test_word_reduction_and_inverse():
    w = Word([1, 2, -2, -1, 3])
    assert w.letters == (3,)
    assert Word([1, -2]).inverse() == Word([2, -1])
    assert (Word([1]) ** -3).letters == (-1, -1, -1)
    assert commutator(Word([1]), Word([1])) == IDENTITY


@pytest.mark.parametrize("g,m", [(0, 3), (1, 1), (1, 2), (2, 1), (0, 5)])
def test_surface_group_relation(g, m):
    p = surface_group(g, m)
    assert p.free_rank == 2 * g + m - 1
    assert p.euler_characteristic == 2 - 2 * g - m
    assert check_surface_relation(p)


def test_surface_group_rejects_closed():
    with pytest.raises(ValidationError):
        surface_group(2, 0)


def test_presentation_json_roundtrip():
    p = surface_group(1, 2)
    assert presentation_from_json(presentation_to_json(p)) == p


def test_evaluate_into_cyclic_group():
    a = FiniteAssignment(CyclicGroup(5), (1, 3))
    assert evaluate(Word([1, 1, -2]), a) == (1 + 1 - 3) % 5


@given(words(2), words(2))
def test_word_perm_is_a_homomorphism(u, v):
    perms = (np.array([1, 2, 0, 3]), np.array([0, 3, 2, 1]))
    U, V = Word(u), Word(v)
    assert np.array_equal(word_perm(U * V, perms), word_perm(U, perms)[word_perm(V, perms)])


@given(words(2), words(2))
def test_evaluate_matches_word_perm(u, v):
    G = PermutationGroup(4)
    imgs = ((1, 2, 0, 3), (0, 3, 2, 1))
    a = FiniteAssignment(G, imgs)
    w = Word(u) * Word(v)
    assert tuple(evaluate(w, a)) == tuple(word_perm(w, [np.array(x) for x in imgs]))


# --- Reidemeister-Schreier -----------------------------------------------------------

def _expand(w_sub: Word, basis) -> Word:
    out = IDENTITY
    for l in w_sub.letters:
        b = basis[abs(l) - 1]
        out = out * (b if l > 0 else b.inverse())
    return out


@given(st.integers(1, 2).flatmap(lambda g: st.tuples(st.just(g), perm_tuple(2 * g, 5))))
def test_rs_basis_against_stallings(data):
    g, (d, perms) = data
    assume(is_transitive(perms, d))
    p = surface_group(g, 1)
    sub = reidemeister_schreier(p, perms)
    assert len(sub.basis) == 1 + d * (p.free_rank - 1)
    for w in sub.basis:
        assert subgroup_membership(w, perms)
    # the folded graph of the basis is the full coset graph of the action
    verts, out = stallings_graph(sub.basis, p.free_rank)
    assert len(verts) == d
    assert len(out) == d * p.free_rank


@given(perm_tuple(2, 5), words(2, 10))
def test_rs_rewrite_roundtrip(data, letters):
    d, perms = data
    assume(is_transitive(perms, d))
    p = surface_group(0, 3)
    sub = reidemeister_schreier(p, perms)
    w = Word(letters)
    x = act_point(w, perms, 0)
    h = sub.tree.reps[x].inverse() * w  # lands back on the basepoint
    assert subgroup_membership(h, perms)
    assert _expand(sub.rewrite(h), sub.basis) == h


@given(perm_tuple(2, 6))
def test_rs_peripherals(data):
    d, perms = data
    assume(is_transitive(perms, d))
    p = surface_group(1, 1)
    sub = reidemeister_schreier(p, perms)
    widths = 0
    for (j, w), ws in zip(sub.peripherals, sub.presentation.peripherals):
        assert subgroup_membership(w, perms)
        assert _expand(ws, sub.basis) == w
    # Riemann-Hurwitz: chi(sub) = d chi(base)
    q = sub.presentation
    assert q.euler_characteristic == d * p.euler_characteristic
    assert q.free_rank == len(sub.basis)


def test_schreier_tree_reps_reach_points():
    perms = (np.array([1, 2, 3, 0]), np.array([0, 1, 2, 3]))
    tree = schreier_tree(perms)
    for x in range(4):
        assert act_point(tree.reps[x], perms, 0) == x


def test_schreier_tree_requires_transitivity():
    with pytest.raises(ValidationError):
        schreier_tree((np.array([1, 0, 2]),))


def test_rs_trivial_cover_is_base():
    p = surface_group(1, 1)
    sub = reidemeister_schreier(p, (np.zeros(1, dtype=np.int64),) * 2)
    assert [w.letters for w in sub.basis] == [(1,), (2,)]
    assert sub.presentation.genus == 1 and sub.presentation.cusps == 1
