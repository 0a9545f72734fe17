"""Group actions, groupoid actions and the semidirect constructions."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from hypothesis import given, settings, strategies as st

from src.actions import (
    LEFT,
    RIGHT,
    action_on_groupoid,
    check_two_group_semidirect,
    group_action,
    groupoid_action,
    product_action,
    semidirect_group,
    semidirect_space,
    stabilizer_space,
    translation_groupoid,
    trivial_action_on,
    validate_action,
)
from src.errors import Refusal
from src.groupoid import (
    b_group,
    check_strict_hom,
    coarse_quotient,
    pair_groupoid,
    stabilizer,
    strictly_equal,
    trivial_groupoid,
    validate_groupoid,
)
from src.groups import are_isomorphic, cyclic_group, symmetric_group, trivial_group


def swap_action(points=("a", "b")):
    return group_action(cyclic_group(2), points, lambda x, k: (x + k) % 2, RIGHT, "swap")


def test_swap_translation_groupoid():
    g = translation_groupoid(swap_action())
    assert (g.n_objects, g.n_arrows) == (2, 4)
    assert len(coarse_quotient(g)) == 1
    assert all(stabilizer(g, x).order == 1 for x in g.objects)
    assert swap_action().orbits() == ((0, 1),)


def test_trivial_action_on_a_point_is_b_group():
    z2 = cyclic_group(2)
    g = translation_groupoid(group_action(z2, ["p"], lambda x, k: x, RIGHT))
    assert strictly_equal(g, b_group(z2))


def test_z4_through_parity_has_stabilizer_of_order_two():
    z4 = cyclic_group(4)
    g = translation_groupoid(group_action(z4, ["a", "b"], lambda x, k: (x + k) % 2, RIGHT))
    assert validate_groupoid(g).ok
    assert len(g.isotropy(0)) == 2


def test_broken_group_action_is_reported():
    z3 = cyclic_group(3)
    bad = group_action(z3, range(3), lambda x, k: (x + 1) % 3 if k else x, RIGHT, "bad")
    report = validate_action(bad)
    assert "compatibility" in report.axioms_failed()
    assert validate_action(swap_action()).ok


def test_units_act_on_the_unit_groupoid_trivially():
    m = trivial_groupoid(["a", "b"])
    action = groupoid_action(m, ["a", "b"], [0, 1], lambda p, g: p, RIGHT)
    assert validate_action(action).ok
    semi, pi = semidirect_space(action)
    assert strictly_equal(semi, m)
    assert check_strict_hom(pi).ok


def test_b_group_on_itself_gives_pair_groupoid():
    z3 = cyclic_group(3)
    bk = b_group(z3)
    action = groupoid_action(bk, list(z3.labels), [0, 0, 0], lambda p, g: z3.mul(p, g), RIGHT)
    assert validate_action(action).ok
    semi, _ = semidirect_space(action)
    assert validate_groupoid(semi).ok
    assert all(len(semi.hom(x, y)) == 1 for x in semi.objects for y in semi.objects)


def test_left_swap_action_of_b_z2():
    bz2 = b_group(cyclic_group(2))
    action = groupoid_action(bz2, ["u", "v"], [0, 0], lambda p, g: (p + g) % 2, LEFT)
    assert validate_action(action).ok
    semi, pi = semidirect_space(action)
    assert (semi.n_objects, semi.n_arrows) == (2, 4)
    assert check_strict_hom(pi).ok


def test_stabilizer_space_is_an_action():
    s = stabilizer_space(b_group(symmetric_group(3)))
    assert validate_action(s).ok
    assert len(s.carrier) == 6


def test_semidirect_with_trivial_group_is_the_groupoid():
    g = pair_groupoid(range(3))
    assert strictly_equal(semidirect_group(trivial_action_on(trivial_group(), g)), g)


def test_semidirect_over_a_set_is_the_translation_groupoid():
    m = trivial_groupoid(["a", "b"])
    z2 = cyclic_group(2)
    action = action_on_groupoid(z2, m, lambda x, k: (x + k) % 2, lambda a, k: (a + k) % 2)
    assert validate_action(action).ok
    assert strictly_equal(semidirect_group(action), translation_groupoid(swap_action()))


def test_inversion_on_b_z3_gives_s3():
    z2, z3 = cyclic_group(2), cyclic_group(3)
    bz3 = b_group(z3)
    inversion = action_on_groupoid(z2, bz3, lambda x, k: x, lambda a, k: z3.inv(a) if k else a)
    assert validate_action(inversion).ok
    semi = semidirect_group(inversion)
    assert semi.n_arrows == 6
    assert validate_groupoid(semi).ok
    assert are_isomorphic(stabilizer(semi, 0), symmetric_group(3))


def test_two_group_lemma_on_swaps():
    m = trivial_groupoid(["a", "b"])
    z2 = cyclic_group(2)
    swap = action_on_groupoid(z2, m, lambda x, k: (x + k) % 2, lambda a, k: (a + k) % 2, "swap")
    result = check_two_group_semidirect(swap, swap)
    assert result.verified
    assert result.combined.n_arrows == 2 * 4


def test_two_group_lemma_on_b_z7():
    z2, z3, z7 = cyclic_group(2), cyclic_group(3), cyclic_group(7)
    bz7 = b_group(z7)
    inversion = action_on_groupoid(z2, bz7, lambda x, k: x, lambda a, k: z7.inv(a) if k else a, "inv")
    result = check_two_group_semidirect(inversion, trivial_action_on(z3, bz7))
    assert result.verified
    assert result.combined.n_arrows == 7 * 6


def test_non_commuting_actions_are_refused():
    m = trivial_groupoid([0, 1, 2])
    z2 = cyclic_group(2)
    swap01 = {0: 1, 1: 0, 2: 2}
    swap12 = {0: 0, 1: 2, 2: 1}
    first = action_on_groupoid(z2, m, lambda x, k: swap01[x] if k else x, lambda a, k: swap01[a] if k else a)
    second = action_on_groupoid(z2, m, lambda x, k: swap12[x] if k else x, lambda a, k: swap12[a] if k else a)
    with pytest.raises(Refusal):
        product_action(first, second)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=4))
def test_translation_groupoids_are_valid(n, points):
    zn = cyclic_group(n)
    action = group_action(zn, range(points), lambda x, k: x, RIGHT)
    assert validate_action(action).ok
    g = translation_groupoid(action)
    assert validate_groupoid(g).ok
    assert g.n_arrows == n * points
