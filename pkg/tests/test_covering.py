import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from horosol.covering import (AssignmentRule, ExplicitRule, FiniteCover, build_class1, build_class1m, build_class2,
                              build_class3_closed, build_congruence_tower, build_example, build_nonregular_one_cusp,
                              build_padic_suspension, classify_trichotomy, cusp_counts, cusp_multiplicities,
                              extend_tower, genus_of_cover, identity_tower, is_composite_regular, is_mccord, is_normal,
                              load_tower, padic_relation_holds, solve_peripheral_homomorphism, step_cover,
                              tower_from_json, tower_to_json)
from horosol.errors import InvariantError, ValidationError
from horosol.finite_groups import CyclicGroup
from horosol.group_core import FiniteAssignment, surface_group
from horosol.perm import generated_order, is_transitive
from strategies import perm_tuple

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = {"class1": 6, "class2": 6, "class3": 6, "nonregular": 4, "congruence": 2, "triadic": 4}


@given(st.integers(1, 2).flatmap(lambda r: st.tuples(st.just(r), perm_tuple(r, 6))))
def test_is_normal_matches_group_order(data):
    # oracle: a transitive action is regular iff the generated group has order = degree
    r, (d, perms) = data
    assume(is_transitive(perms, d))
    base = surface_group(0, r + 1)
    c = FiniteCover(base, perms)
    assert is_normal(c) == (generated_order(perms) == d)


@given(perm_tuple(2, 6))
def test_genus_matches_reidemeister_schreier(data):
    d, perms = data
    assume(is_transitive(perms, d))
    c = FiniteCover(surface_group(1, 1), perms)
    assert genus_of_cover(c) == c.subgroup.presentation.genus
    assert sum(cusp_multiplicities(c)) == c.subgroup.presentation.cusps


def test_cover_validation():
    with pytest.raises(ValidationError):
        FiniteCover(surface_group(1, 1), (np.array([0, 1]),))
    with pytest.raises(InvariantError, match="transitivity"):
        FiniteCover(surface_group(1, 1), (np.array([0, 1]), np.array([0, 1])))


@pytest.mark.parametrize("depth", [1, 6])
def test_class1_constant_cusps(depth):
    t = build_class1(depth)
    for j in range(t.base.cusps):
        assert cusp_counts(t, j) == (1,) * (depth + 1)
    assert is_mccord(t)


def test_class1m_keeps_m_cusps():
    t = build_class1m(4, 3)
    assert t.base.cusps == 4
    assert all(cusp_counts(t, j) == (1, 1, 1, 1) for j in range(4))
    assert classify_trichotomy(t).verdict == "Class1"


def test_class2_counts_and_mccord():
    t = build_class2(6)
    assert cusp_counts(t) == (1, 2, 2, 2, 2, 2, 2)
    assert is_mccord(t)
    # as covers of the base the higher levels are not regular
    assert not is_composite_regular(t)
    rep = classify_trichotomy(t)
    assert (rep.verdict, rep.m, rep.stabilization_level) == ("Class2", 2, 1)


def test_class3_doubling():
    t = build_class3_closed(6)
    assert cusp_counts(t) == tuple(2 ** n for n in range(7))
    assert [genus_of_cover(l) for l in t.levels] == [1] * 7
    assert str(classify_trichotomy(t.truncate(5))) == "Class3-so-far, c=(1,2,4,8,16,32)"


def test_nonregular_one_cusp():
    t = build_nonregular_one_cusp(4)
    assert cusp_counts(t) == (1,) * 5
    assert [genus_of_cover(l) for l in t.levels] == [(3 ** n + 1) // 2 for n in range(5)]
    assert not is_mccord(t)


def test_congruence_tower_levels():
    t = build_congruence_tower(3)
    assert [l.degree for l in t.levels] == [1, 4, 96]
    assert [cusp_counts(t, j) for j in range(3)] == [(1, 2, 16)] * 3
    assert genus_of_cover(t.levels[2]) == 25  # Gamma(12)
    assert is_mccord(t) and is_composite_regular(t)


def test_step_cover_degrees():
    t = build_class2(3)
    assert [step_cover(t, n).degree for n in range(3)] == [2, 2, 2]
    with pytest.raises(ValidationError):
        step_cover(t, 3)


@pytest.mark.parametrize("k", range(1, 11))
def test_triadic_relation(k):
    assert padic_relation_holds(3, 1, k)


@pytest.mark.parametrize("k", range(1, 7))
def test_relation_p7_n2(k):
    assert padic_relation_holds(7, 2, k)


def test_padic_rejects_noninvertible_multiplier():
    with pytest.raises(ValidationError):
        build_padic_suspension(5, 4, 2)


def test_padic_tower_one_cusp_each():
    t = build_padic_suspension(7, 2, 3)
    assert [cusp_counts(t, j) for j in range(2)] == [(1, 1, 1, 1)] * 2
    assert not is_mccord(t)


def test_trichotomy_needs_depth():
    with pytest.raises(ValidationError):
        classify_trichotomy(build_class2(1))


def test_window_controls_class3_verdict():
    t = build_class2(4)
    assert classify_trichotomy(t, window=4).verdict == "Class3-so-far"
    assert classify_trichotomy(t, window=1).verdict == "Class2"


def test_peripheral_homomorphism_obstruction():
    # on S_{0,3} the three peripherals multiply to 1, so (1, 0, 0) is impossible mod 2
    assert solve_peripheral_homomorphism(surface_group(0, 3), [1, 0, 0], 2) is None
    a = solve_peripheral_homomorphism(surface_group(0, 3), [1, 1, 0], 2)
    assert a is not None


def test_incompatible_extension_rejected():
    t = identity_tower(surface_group(1, 1))
    t = extend_tower(t, AssignmentRule(FiniteAssignment(CyclicGroup(2), (1, 0))))
    bad = (np.array([1, 0, 3, 2]), np.array([2, 3, 0, 1]))
    with pytest.raises(InvariantError, match="compatibility"):
        extend_tower(t, ExplicitRule(bad, np.array([0, 0, 1, 1])))


def test_unknown_example():
    with pytest.raises(ValidationError):
        build_example("nope", 2)


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_fixture_bytes(name):
    path = FIXTURES / f"{name}.tower.json"
    rebuilt = json.dumps(tower_to_json(build_example(name, GOLDEN[name])), separators=(",", ":"), sort_keys=True)
    assert path.read_text() == rebuilt + "\n"


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_fixture_roundtrip(name):
    t = load_tower(FIXTURES / f"{name}.tower.json")
    assert t.depth == GOLDEN[name]
    t2 = tower_from_json(tower_to_json(t))
    for a, b in zip(t.levels, t2.levels):
        assert all(np.array_equal(x, y) for x, y in zip(a.perms, b.perms))


def test_tampered_fixture_detected():
    data = json.loads((FIXTURES / "class2.tower.json").read_text())
    act = data["levels"][2]["action"][0]
    act[0], act[1] = act[1], act[0]
    with pytest.raises((InvariantError, ValidationError)):
        tower_from_json(data)


def test_schema_version_pinned():
    data = json.loads((FIXTURES / "class3.tower.json").read_text())
    assert data["schema_version"] == 1
    data["schema_version"] = 99
    with pytest.raises(ValidationError):
        tower_from_json(data)


def test_padic_fixture_bytes():
    rebuilt = json.dumps(tower_to_json(build_padic_suspension(7, 2, 4)), separators=(",", ":"), sort_keys=True)
    assert (FIXTURES / "padic7_2.tower.json").read_text() == rebuilt + "\n"
