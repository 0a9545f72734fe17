"""Covers, descent data, gluing, the stack check and bundle cocycles."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from src import corpus
from src.bibundle import find_two_iso, from_strict_hom, validate_bibundle
from src.config import get_config
from src.descent import (
    check_stack_property,
    cocycle_datum,
    cocycle_to_bundle,
    cocycle_witness,
    descent_datum,
    enumerate_standard_descent_data,
    find_descent_iso,
    glue,
    make_cover,
    part_constant_trivialization,
    product_of_bundles,
    restrict,
    singleton_cover,
    validate_descent,
)
from src.errors import Refusal, StructureError
from src.groupoid import StrictHom, b_group, pair_groupoid, trivial_groupoid
from src.groups import cyclic_group


@pytest.fixture
def fresh_config():
    get_config.cache_clear()
    yield
    get_config.cache_clear()


def constant_map(cover, target, y=0):
    n = len(cover.points)
    return from_strict_hom(StrictHom(cover.space, target, (y,) * n, (target.unit[y],) * n, "const"))


def test_cover_validation():
    cover = corpus.circle_cover()
    assert cover.overlap(0, 1) == (1,)
    assert cover.overlap(0, 1, 2) == ()
    assert cover.containing(0) == (0, 2)
    with pytest.raises(StructureError):
        make_cover(["a", "b"], [[0]])
    with pytest.raises(StructureError):
        make_cover(["a"], [[]])
    with pytest.raises(StructureError):
        make_cover(["a", "a"], [[0, 1]])


def test_restriction_then_gluing_recovers_the_map():
    cover = corpus.circle_cover()
    bz2 = b_group(cyclic_group(2))
    psi = constant_map(cover, bz2)
    d = restrict(psi, cover)
    assert validate_descent(d).ok
    glued = glue(d)
    assert len(glued) == len(psi)
    assert find_two_iso(glued, psi) is not None


def test_gluing_into_the_pair_groupoid():
    cover = corpus.interval_cover()
    pair = pair_groupoid(range(2))
    d = restrict(constant_map(cover, pair, 1), cover)
    assert validate_descent(d).ok
    assert validate_bibundle(glue(d)).ok


def test_missing_part_is_structural():
    cover = corpus.circle_cover()
    bz2 = b_group(cyclic_group(2))
    d = restrict(constant_map(cover, bz2), cover)
    short = descent_datum(cover, bz2, d.local[:2], {})
    report = validate_descent(short)
    assert report.structural
    assert "index mismatch" in report.axioms_failed()


def test_broken_cocycle_is_witnessed():
    cover = make_cover(["p"], [[0], [0], [0]], "triple")
    z2 = cyclic_group(2)
    k = {(0, 1): {0: 1}, (1, 2): {0: 1}, (0, 2): {0: 1}}
    assert cocycle_witness(cover, z2, k) == (0, 1, 2, "p")
    with pytest.raises(Refusal):
        cocycle_datum(cover, z2, k)
    d = cocycle_datum(cover, z2, k, check=False)
    report = validate_descent(d)
    assert "cocycle" in report.axioms_failed()
    with pytest.raises(Refusal):
        glue(d)


def test_consistent_triple_cocycle_glues():
    cover = make_cover(["p"], [[0], [0], [0]], "triple")
    z2 = cyclic_group(2)
    k = {(0, 1): {0: 1}, (1, 2): {0: 1}, (0, 2): {0: 0}}
    assert cocycle_witness(cover, z2, k) is None
    assert len(cocycle_to_bundle(cover, z2, k)) == 2


def test_mobius_cocycle_has_no_part_constant_section():
    cover, z2, k = corpus.mobius_cocycle()
    assert part_constant_trivialization(cover, z2, k) is None
    psi = cocycle_to_bundle(cover, z2, k)
    assert len(psi) == 6
    assert validate_bibundle(psi).ok


def test_cylinder_cocycle_is_part_constant():
    cover, z2, k = corpus.cylinder_cocycle()
    assert part_constant_trivialization(cover, z2, k) == (0, 0, 0)


def test_mobius_and_cylinder_agree_over_a_discrete_set():
    cover, z2, mobius = corpus.mobius_cocycle()
    _, _, cylinder = corpus.cylinder_cocycle()
    bz2 = b_group(z2)
    p = cocycle_to_bundle(cover, z2, mobius, bz2)
    q = cocycle_to_bundle(cover, z2, cylinder, bz2)
    assert find_two_iso(p, q) is not None
    assert find_descent_iso(cocycle_datum(cover, z2, mobius, bz2), cocycle_datum(cover, z2, cylinder, bz2)) is not None


def test_product_of_bundles():
    cover, z2, mobius = corpus.mobius_cocycle()
    z3 = cyclic_group(3)
    p = cocycle_to_bundle(cover, z2, mobius)
    q = cocycle_to_bundle(cover, z3, {(0, 1): {1: 0}, (1, 2): {2: 0}, (0, 2): {0: 1}})
    pq = product_of_bundles(p, q, z2, z3)
    assert len(pq) == 3 * 2 * 3
    assert validate_bibundle(pq).ok


def test_standard_data_on_the_interval():
    cover = corpus.interval_cover()
    data = list(enumerate_standard_descent_data(cover, b_group(cyclic_group(2))))
    assert len(data) == 2
    assert all(validate_descent(d).ok for d in data)


def test_stack_property_exhaustive(fresh_config):
    report = check_stack_property(corpus.interval_cover(), b_group(cyclic_group(2)))
    assert report.exhaustive
    assert report.ok
    assert report.data_checked == 2
    assert report.two_isos_matched > 0


def test_stack_property_on_singletons(fresh_config):
    cover = singleton_cover(["a", "b"])
    report = check_stack_property(cover, pair_groupoid(range(2)))
    assert report.ok
    assert report.data_checked == 4


def test_stack_property_sampled(monkeypatch, fresh_config):
    monkeypatch.setenv("GROUPOID_STACK_EXHAUSTIVE_POINTS", "0")
    get_config.cache_clear()
    report = check_stack_property(corpus.circle_cover(), b_group(cyclic_group(2)), sample_size=4, seed=3)
    assert not report.exhaustive
    assert report.seed == 3
    assert report.data_checked == 4
    assert report.ok


def test_exhaustive_stack_check_compares_every_pair(fresh_config):
    report = check_stack_property(corpus.circle_cover(), b_group(cyclic_group(2)))
    assert report.exhaustive
    assert report.data_checked == 8
    assert report.pairs_checked == 64
    assert report.pair_limit is None
    assert report.ok


def test_sampled_stack_check_records_the_pair_cap(monkeypatch, fresh_config):
    monkeypatch.setenv("GROUPOID_STACK_EXHAUSTIVE_POINTS", "0")
    get_config.cache_clear()
    report = check_stack_property(corpus.circle_cover(), b_group(cyclic_group(2)), sample_size=8, seed=1)
    assert not report.exhaustive
    assert report.pair_limit == get_config().stack_pair_limit
    assert report.pairs_checked == report.pair_limit
    assert report.ok


COVERS = {
    "interval": corpus.interval_cover,
    "circle": corpus.circle_cover,
    "singletons": lambda: singleton_cover(["a", "b", "c"]),
}

TARGETS = {
    "point": (lambda: trivial_groupoid(["*"], "point"), 1),
    "bz2": (lambda: b_group(cyclic_group(2)), 2),
    "bz3": (lambda: b_group(cyclic_group(3)), 3),
}

# transitions per cover: one free arrow for each point lying in two parts
OVERLAP_POINTS = {"interval": 1, "circle": 3, "singletons": 0}


@pytest.mark.parametrize("cover_name", sorted(COVERS))
@pytest.mark.parametrize("target_name", sorted(TARGETS))
def test_stack_property_holds_on_small_covers(cover_name, target_name, fresh_config):
    make_target, order = TARGETS[target_name]
    report = check_stack_property(COVERS[cover_name](), make_target())
    assert report.exhaustive
    assert report.data_checked == order ** OVERLAP_POINTS[cover_name]
    assert report.pairs_checked == report.data_checked ** 2
    assert report.two_isos_matched >= report.data_checked
    assert report.ok, report.failures
