"""Bibundles: validation, composition, 2-isomorphisms and equivalence decisions."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from itertools import combinations, product

import numpy as np
import pytest

from src import corpus
from src.actions import LEFT, RIGHT, group_action, translation_groupoid
from src.bibundle import (
    check_two_iso,
    compose,
    decide_weak_equivalence,
    enumerate_two_isos,
    extract_translation_data,
    find_two_iso,
    from_strict_hom,
    identity_bibundle,
    induced_coarse_map,
    induced_stabilizer_hom,
    is_equivalence,
    is_essential_equivalence,
    make_bibundle,
    opposite_bibundle,
    principality_by_bijection,
    search_equivalence_functor,
    translation_bibundle,
    validate_bibundle,
)
from src.errors import Refusal, StructureError
from src.groupoid import StrictHom, b_group, disjoint_union, identity_hom, pair_groupoid, trivial_groupoid
from src.groups import cyclic_group, direct_product, symmetric_group, trivial_group


@pytest.fixture
def point():
    return trivial_groupoid(["*"], "point")


@pytest.fixture
def pair2():
    return pair_groupoid(range(2))


def permuted(p, perm):
    """The same bibundle with point q renamed perm[q]."""
    back = [0] * len(perm)
    for q, r in enumerate(perm):
        back[r] = q
    return make_bibundle(
        p.source, p.target, [p.total[back[r]] for r in range(len(perm))],
        [p.s_p[back[r]] for r in range(len(perm))], [p.t_p[back[r]] for r in range(len(perm))],
        lambda a, r: perm[p.lact(a, back[r])], lambda r, b: perm[p.ract(back[r], b)], "perm")


def test_identity_bibundle_is_a_valid_equivalence():
    for g in (pair_groupoid(range(3)), b_group(cyclic_group(3)), trivial_groupoid(["a"])):
        p = identity_bibundle(g)
        assert validate_bibundle(p).ok
        assert len(p) == g.n_arrows
        assert is_equivalence(p).verified
        assert principality_by_bijection(p)


def test_principal_z2_bundle_over_two_points():
    m = trivial_groupoid(["a", "b"])
    bz2 = b_group(cyclic_group(2))
    p = make_bibundle(m, bz2, [(u, k) for u in "ab" for k in range(2)], [0, 0, 1, 1], [0, 0, 0, 0],
                      lambda a, q: q, lambda q, h: 2 * (q // 2) + (q % 2 + h) % 2)
    assert validate_bibundle(p).ok
    assert principality_by_bijection(p)
    cert = is_equivalence(p)
    assert not cert.verified
    assert cert.detail == {"right_principal": True, "left_principal": False}


def test_missing_orbit_breaks_principality():
    m = trivial_groupoid(["a", "b"])
    p = make_bibundle(m, m, ["a"], [0], [0], lambda a, q: q, lambda q, b: q)
    report = validate_bibundle(p)
    assert "right action not principal" in report.axioms_failed()
    assert report.violations[-1].witness[0] == "not surjective"
    assert not principality_by_bijection(p)


def test_inclusion_of_a_point_into_the_pair_groupoid(point, pair2):
    phi = StrictHom(point, pair2, (0,), (0,), "incl")
    p = from_strict_hom(phi)
    assert len(p) == 2
    assert validate_bibundle(p).ok
    assert is_equivalence(p).verified
    assert is_essential_equivalence(phi).verified


def test_quotient_of_z4_onto_z2_is_not_an_equivalence():
    bz4, bz2 = b_group(cyclic_group(4)), b_group(cyclic_group(2))
    p = from_strict_hom(StrictHom(bz4, bz2, (0,), (0, 1, 0, 1), "parity"))
    assert validate_bibundle(p).ok
    cert = is_equivalence(p)
    assert not cert.verified
    assert cert.detail["right_principal"] and not cert.detail["left_principal"]
    assert cert.witnesses[0][:2] == ("left", "not free")


def test_strict_hom_bibundle_matches_identity_bibundle():
    g = b_group(symmetric_group(3))
    p, q = identity_bibundle(g), from_strict_hom(identity_hom(g))
    alpha = find_two_iso(p, q)
    assert alpha is not None
    assert check_two_iso(p, q, alpha).ok


def test_composition_with_identities_is_two_isomorphic(point, pair2):
    p = from_strict_hom(StrictHom(point, pair2, (0,), (0,), "incl"))
    right = compose(p, identity_bibundle(pair2))
    left = compose(identity_bibundle(point), p)
    assert validate_bibundle(right).ok and validate_bibundle(left).ok
    assert find_two_iso(right, p) is not None
    assert find_two_iso(left, p) is not None


def test_composite_of_equivalences_through_the_pair_groupoid(point, pair2):
    p = from_strict_hom(StrictHom(point, pair2, (0,), (0,), "incl"))
    q = from_strict_hom(StrictHom(pair2, point, (0, 0), (0, 0, 0, 0), "collapse"))
    pq = compose(p, q)
    assert len(pq) == 1
    assert validate_bibundle(pq).ok
    assert is_equivalence(pq).verified


def test_compose_needs_matching_groupoids(point, pair2):
    p = from_strict_hom(StrictHom(point, pair2, (0,), (0,), "incl"))
    with pytest.raises(StructureError):
        compose(p, p)


def test_opposite_of_an_equivalence(point, pair2):
    p = from_strict_hom(StrictHom(point, pair2, (0,), (0,), "incl"))
    op = opposite_bibundle(p)
    assert op.source is pair2 and op.target is point
    assert validate_bibundle(op).ok
    loop = compose(p, op)
    assert len(loop) == 1
    assert find_two_iso(loop, identity_bibundle(point)) is not None


def test_distinct_homomorphisms_are_not_two_isomorphic():
    bz2 = b_group(cyclic_group(2))
    identity = from_strict_hom(identity_hom(bz2))
    trivial = from_strict_hom(StrictHom(bz2, bz2, (0,), (0, 0), "trivial"))
    assert len(identity) == len(trivial)
    assert find_two_iso(identity, trivial) is None


def test_relabeled_total_set_is_two_isomorphic(pair2):
    p = identity_bibundle(pair2)
    q = permuted(p, [2, 0, 3, 1])
    assert validate_bibundle(q).ok
    alpha = find_two_iso(p, q)
    assert alpha == (2, 0, 3, 1)
    assert check_two_iso(p, q, alpha).ok
    assert not check_two_iso(p, q, (0, 1, 2, 3)).ok


def test_automorphisms_of_the_identity_bibundle_are_central():
    for group, expected in ((cyclic_group(3), 3), (symmetric_group(3), 1), (cyclic_group(2), 2)):
        p = identity_bibundle(b_group(group))
        assert len(list(enumerate_two_isos(p, p))) == expected


def test_essential_equivalence_detects_missing_arrows():
    m = trivial_groupoid(["a", "b"])
    pair = pair_groupoid(["a", "b"])
    cert = is_essential_equivalence(StrictHom(m, pair, (0, 1), (0, 3), "units"))
    assert not cert.verified
    assert cert.detail["essentially_surjective"]
    assert not cert.detail["fully_faithful"]


def test_essential_equivalence_for_larger_pair_groupoids(point):
    for n in range(1, 6):
        pair = pair_groupoid(range(n))
        assert is_essential_equivalence(StrictHom(point, pair, (0,), (0,), "incl")).verified


def test_induced_coarse_map(pair2, point):
    g = disjoint_union(b_group(cyclic_group(2)), pair2)
    assert induced_coarse_map(identity_bibundle(g)).mapping == (0, 1)
    collapse = from_strict_hom(StrictHom(pair2, point, (0, 0), (0, 0, 0, 0), "collapse"))
    coarse = induced_coarse_map(collapse)
    assert coarse.mapping == (0,)
    assert coarse.is_bijection


def test_induced_stabilizer_hom_of_identity_is_an_isomorphism():
    for group in (cyclic_group(3), symmetric_group(3)):
        psi = induced_stabilizer_hom(identity_bibundle(b_group(group)), 0, 0)
        assert psi.is_homomorphism
        assert psi.is_isomorphism


def test_induced_stabilizer_hom_of_parity():
    bz4, bz2 = b_group(cyclic_group(4)), b_group(cyclic_group(2))
    psi = induced_stabilizer_hom(from_strict_hom(StrictHom(bz4, bz2, (0,), (0, 1, 0, 1), "parity")), 0, 0)
    assert psi.is_homomorphism
    assert not psi.is_isomorphism
    assert psi.arrow_images() == {0: 0, 1: 1, 2: 0, 3: 1}


def swap_translation_data(k_fn=lambda p, k: (p + k) % 2):
    z2, triv = cyclic_group(2), trivial_group()
    x_action = group_action(z2, ["a", "b"], lambda x, k: (x + k) % 2, RIGHT)
    y_action = group_action(triv, ["*"], lambda x, k: x, RIGHT)
    k_on_p = group_action(z2, ["pa", "pb"], k_fn, LEFT)
    l_on_p = group_action(triv, ["pa", "pb"], lambda p, k: p, RIGHT)
    return x_action, y_action, k_on_p, l_on_p


def test_translation_bibundle_of_the_swap():
    x_action, y_action, k_on_p, l_on_p = swap_translation_data()
    p = translation_bibundle(x_action, y_action, translation_groupoid(x_action), translation_groupoid(y_action),
                             ["pa", "pb"], [0, 1], [0, 0], k_on_p, l_on_p)
    assert validate_bibundle(p).ok
    assert is_equivalence(p).verified
    k_back, l_back = extract_translation_data(p, x_action, y_action)
    assert np.array_equal(k_back.table, k_on_p.table)
    assert np.array_equal(l_back.table, l_on_p.table)


def test_translation_bibundle_refuses_non_equivariant_data():
    x_action, y_action, k_on_p, l_on_p = swap_translation_data(lambda p, k: p)
    with pytest.raises(Refusal):
        translation_bibundle(x_action, y_action, translation_groupoid(x_action), translation_groupoid(y_action),
                             ["pa", "pb"], [0, 1], [0, 0], k_on_p, l_on_p)


def test_translation_bibundle_with_free_fibre():
    z2, triv = cyclic_group(2), trivial_group()
    x_action = group_action(triv, ["*"], lambda x, k: x, RIGHT)
    y_action = group_action(z2, ["*"], lambda x, k: x, RIGHT)
    k_on_p = group_action(triv, [0, 1], lambda p, k: p, LEFT)
    l_on_p = group_action(z2, [0, 1], lambda p, b: (p + b) % 2, RIGHT)
    p = translation_bibundle(x_action, y_action, translation_groupoid(x_action), translation_groupoid(y_action),
                             [0, 1], [0, 0], [0, 0], k_on_p, l_on_p)
    assert validate_bibundle(p).ok
    assert not is_equivalence(p).verified
    _, l_back = extract_translation_data(p, x_action, y_action)
    assert np.array_equal(l_back.table, l_on_p.table)


def test_translation_bibundle_refuses_a_non_principal_fibre():
    z2, triv = cyclic_group(2), trivial_group()
    point_action = group_action(triv, ["*"], lambda x, k: x, RIGHT)
    y_action = group_action(z2, ["*"], lambda x, k: x, RIGHT)
    k_on_p = group_action(triv, [0, 1], lambda p, k: p, LEFT)
    fixed = group_action(z2, [0, 1], lambda p, b: p, RIGHT)
    with pytest.raises(Refusal) as info:
        translation_bibundle(point_action, y_action, translation_groupoid(point_action),
                             translation_groupoid(y_action), [0, 1], [0, 0], [0, 0], k_on_p, fixed)
    assert info.value.witness[0] == "not free"

    l_on_p = group_action(triv, [0, 1], lambda p, b: p, RIGHT)
    with pytest.raises(Refusal) as info:
        translation_bibundle(point_action, point_action, translation_groupoid(point_action),
                             translation_groupoid(point_action), [0, 1], [0, 0], [0, 0], k_on_p, l_on_p)
    assert info.value.witness == ("not transitive", 0, 1)


def test_translation_bibundle_refuses_an_empty_fibre():
    triv = trivial_group()
    x_action = group_action(triv, ["a", "b"], lambda x, k: x, RIGHT)
    y_action = group_action(triv, ["*"], lambda x, k: x, RIGHT)
    k_on_p = group_action(triv, ["p"], lambda p, k: p, LEFT)
    l_on_p = group_action(triv, ["p"], lambda p, b: p, RIGHT)
    with pytest.raises(Refusal) as info:
        translation_bibundle(x_action, y_action, translation_groupoid(x_action), translation_groupoid(y_action),
                             ["p"], [0], [0], k_on_p, l_on_p)
    assert info.value.witness[0] == "not surjective"


def test_pair_groupoid_is_weakly_equivalent_to_a_point(point):
    w = decide_weak_equivalence(pair_groupoid(range(3)), point)
    assert w.equivalent
    assert validate_bibundle(w.bibundle).ok
    assert is_equivalence(w.bibundle).verified


def test_z4_and_klein_four_are_told_apart():
    bz4 = b_group(cyclic_group(4))
    bv4 = b_group(direct_product(cyclic_group(2), cyclic_group(2)))
    w = decide_weak_equivalence(bz4, bv4)
    assert not w.equivalent
    assert w.report.reason == "stabilizer types differ"
    assert w.bibundle is None
    assert [c.stabilizer_order for c in w.report.left_classes] == [4]


def test_class_counts_are_compared_first(point):
    w = decide_weak_equivalence(pair_groupoid(range(3)), disjoint_union(point, point), construct=False)
    assert not w.equivalent
    assert w.report.reason == "coarse class counts differ (1 vs 2)"


def test_classes_are_matched_out_of_order(point):
    bz2 = b_group(cyclic_group(2))
    g, h = disjoint_union(bz2, point), disjoint_union(point, bz2)
    w = decide_weak_equivalence(g, h)
    assert w.equivalent
    assert w.report.matching == [1, 0]
    assert validate_bibundle(w.bibundle).ok
    assert is_equivalence(w.bibundle).verified


def test_functor_search(point):
    pair = pair_groupoid(range(3))
    assert search_equivalence_functor(pair, point) is not None
    phi = search_equivalence_functor(point, pair)
    assert phi is not None and is_essential_equivalence(phi).verified
    bz4 = b_group(cyclic_group(4))
    bv4 = b_group(direct_product(cyclic_group(2), cyclic_group(2)))
    assert search_equivalence_functor(bz4, bv4) is None


def test_equivalence_decision_agrees_with_functor_search():
    examples = corpus.small_groupoids()
    pairs = list(combinations(sorted(examples), 2))
    assert len(pairs) >= 50
    equivalent = 0
    for a, b in pairs:
        g, h = examples[a], examples[b]
        assert max(g.n_arrows, h.n_arrows) <= 12
        verdict = decide_weak_equivalence(g, h, construct=False).equivalent
        assert verdict == (search_equivalence_functor(g, h) is not None), (a, b)
        equivalent += verdict
    assert equivalent >= 10


@pytest.fixture(scope="module")
def small_maps():
    """Bibundles between a point, Pair2, B(Z2) and B(Z4), keyed by name."""
    point = trivial_groupoid(["*"], "point")
    pair2 = pair_groupoid(range(2))
    bz2, bz4 = b_group(cyclic_group(2)), b_group(cyclic_group(4))
    homs = [
        StrictHom(point, pair2, (0,), (0,), "incl"),
        StrictHom(pair2, point, (0, 0), (0, 0, 0, 0), "collapse"),
        StrictHom(point, bz2, (0,), (0,), "unit2"),
        StrictHom(bz2, point, (0,), (0, 0), "forget2"),
        StrictHom(point, bz4, (0,), (0,), "unit4"),
        StrictHom(bz4, bz2, (0,), (0, 1, 0, 1), "parity"),
        StrictHom(bz2, bz4, (0,), (0, 2), "double"),
        StrictHom(bz4, bz4, (0,), (0, 3, 2, 1), "negate"),
    ]
    maps = [from_strict_hom(phi) for phi in homs]
    maps += [identity_bibundle(g) for g in (point, pair2, bz2, bz4)]
    maps.append(opposite_bibundle(maps[0]))
    return maps


def test_composition_is_associative_up_to_two_isomorphism(small_maps):
    triples = [(p, q, r) for p, q, r in product(small_maps, repeat=3)
               if p.target is q.source and q.target is r.source]
    assert len(triples) >= 30
    for p, q, r in triples:
        left, right = compose(compose(p, q), r), compose(p, compose(q, r))
        assert validate_bibundle(left).ok
        assert len(left) == len(right)
        alpha = find_two_iso(left, right)
        assert alpha is not None, (p.name, q.name, r.name)
        assert check_two_iso(left, right, alpha).ok


def test_strict_hom_bibundle_is_an_equivalence_exactly_when_the_hom_is():
    point = trivial_groupoid(["*"], "point")
    m = trivial_groupoid(["a", "b"])
    pair2, pair3 = pair_groupoid(range(2)), pair_groupoid(range(3))
    bz2, bz4 = b_group(cyclic_group(2)), b_group(cyclic_group(4))
    s3 = symmetric_group(3)
    bv4, bs3 = b_group(direct_product(cyclic_group(2), cyclic_group(2))), b_group(s3)
    bz2_plus_point = disjoint_union(bz2, point)
    fold = (0, 0, 1)
    cases = [
        (StrictHom(point, pair2, (0,), (0,), "incl"), True),
        (StrictHom(pair2, point, (0, 0), (0, 0, 0, 0), "collapse"), True),
        (StrictHom(bz4, bz2, (0,), (0, 1, 0, 1), "parity"), False),
        (StrictHom(bz2, bz4, (0,), (0, 2), "double"), False),
        (StrictHom(bz2, point, (0,), (0, 0), "forget"), False),
        (StrictHom(point, bz2, (0,), (0,), "unit"), False),
        (StrictHom(bz4, bz4, (0,), (0, 3, 2, 1), "negate"), True),
        (identity_hom(pair3), True),
        (StrictHom(m, pair2, (0, 1), (0, 3), "units"), False),
        (StrictHom(pair3, pair2, fold, tuple(fold[a // 3] * 2 + fold[a % 3] for a in pair3.arrows), "fold"), True),
        (StrictHom(bz2, bz2_plus_point, (0,), (0, 1), "summand"), False),
        (StrictHom(bz2, bz2, (0,), (0, 0), "trivial"), False),
        (StrictHom(bv4, bz2, (0,), (0, 0, 1, 1), "first"), False),
        (StrictHom(bs3, bz2, (0,), tuple(corpus.parity(s3.label(a)) for a in s3.elements), "sign"), False),
        (StrictHom(corpus.free_translation(2), point, (0, 0), (0, 0, 0, 0), "orbit"), True),
    ]
    assert len(cases) >= 10
    for phi, expected in cases:
        p = from_strict_hom(phi)
        assert validate_bibundle(p).ok, phi.name
        assert is_essential_equivalence(phi).verified == expected, phi.name
        assert is_equivalence(p).verified == expected, phi.name
