"""Group toolkit: tables, products, isomorphism search."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from hypothesis import given, strategies as st

from src.errors import StructureError
from src.groups import (
    FiniteGroup,
    are_isomorphic,
    automorphism_group,
    compose_perm,
    cyclic_group,
    dihedral_group,
    direct_product,
    invert_perm,
    is_homomorphism,
    isomorphisms,
    pair_index,
    symmetric_group,
    trivial_group,
    validate_group,
)

# Smallest loop that is not a group: every element squares to 0, (1·1)·2 != 1·(1·2)
LOOP5 = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def test_cyclic_group_table():
    z5 = cyclic_group(5)
    assert z5.order == 5
    assert z5.identity == 0
    assert z5.mul(3, 4) == 2
    assert z5.inv(2) == 3
    assert z5.is_abelian
    assert validate_group(z5).ok


def test_symmetric_group_is_lexicographic_with_composition():
    s3 = symmetric_group(3)
    assert s3.labels[0] == (0, 1, 2)
    assert list(s3.labels) == sorted(s3.labels)
    p, q = s3.index((1, 0, 2)), s3.index((0, 2, 1))
    assert s3.label(s3.mul(p, q)) == compose_perm((1, 0, 2), (0, 2, 1))
    assert not s3.is_abelian
    assert len(s3.center) == 1


def test_dihedral_center_and_orders():
    d4 = dihedral_group(4)
    assert d4.order == 8
    assert not d4.is_abelian
    assert len(d4.center) == 2
    assert sorted(d4.element_orders) == [1, 2, 2, 2, 2, 2, 4, 4]


def test_direct_product_pairs_lexicographically():
    z2, z3 = cyclic_group(2), cyclic_group(3)
    g = direct_product(z2, z3)
    assert g.order == 6
    assert g.label(pair_index(z3, 1, 2)) == (1, 2)
    assert are_isomorphic(g, cyclic_group(6))


def test_isomorphism_types():
    v4 = direct_product(cyclic_group(2), cyclic_group(2))
    assert not are_isomorphic(cyclic_group(4), v4)
    assert are_isomorphic(symmetric_group(3), dihedral_group(3))
    assert not are_isomorphic(cyclic_group(6), symmetric_group(3))


def test_automorphism_group_orders():
    assert automorphism_group(trivial_group()).order == 1
    assert automorphism_group(cyclic_group(4)).order == 2
    assert automorphism_group(direct_product(cyclic_group(2), cyclic_group(2))).order == 6
    aut_s3 = automorphism_group(symmetric_group(3))
    assert aut_s3.order == 6
    assert are_isomorphic(aut_s3, symmetric_group(3))


def test_every_enumerated_isomorphism_is_a_bijective_homomorphism():
    s3 = symmetric_group(3)
    d3 = dihedral_group(3)
    found = list(isomorphisms(s3, d3))
    assert len(found) == 6
    for images in found:
        assert is_homomorphism(s3, d3, images)
        assert sorted(images) == list(d3.elements)


def test_parity_is_a_homomorphism():
    assert is_homomorphism(cyclic_group(4), cyclic_group(2), [k % 2 for k in range(4)])
    assert not is_homomorphism(cyclic_group(3), cyclic_group(2), [0, 1, 0])


def test_subgroup_keeps_labels():
    z4 = cyclic_group(4)
    sub = z4.subgroup([0, 2], "2Z4")
    assert sub.labels == (0, 2)
    assert are_isomorphic(sub, cyclic_group(2))
    assert z4.is_normal([0, 2])
    with pytest.raises(StructureError):
        z4.subgroup([0, 1])


def test_table_without_identity_is_rejected():
    with pytest.raises(StructureError):
        FiniteGroup([[0, 0], [0, 0]])


def test_non_associative_loop_fails_validation():
    loop = FiniteGroup(LOOP5, name="loop")
    report = validate_group(loop)
    assert not report.ok
    assert report.axioms_failed() == ["associativity"]


@given(st.integers(min_value=1, max_value=12), st.data())
def test_cyclic_associativity(n, data):
    g = cyclic_group(n)
    a, b, c = (data.draw(st.integers(min_value=0, max_value=n - 1)) for _ in range(3))
    assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))


@given(st.integers(min_value=3, max_value=6), st.data())
def test_dihedral_associativity(n, data):
    g = dihedral_group(n)
    a, b, c = (data.draw(st.sampled_from(list(g.elements))) for _ in range(3))
    assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))
    assert g.mul(a, g.inv(a)) == g.identity


@given(st.permutations(list(range(5))), st.permutations(list(range(5))))
def test_compose_perm_inverse_law(p, q):
    p, q = tuple(p), tuple(q)
    ident = tuple(range(5))
    assert compose_perm(p, invert_perm(p)) == ident
    assert compose_perm(invert_perm(p), p) == ident
    assert invert_perm(compose_perm(p, q)) == compose_perm(invert_perm(q), invert_perm(p))
