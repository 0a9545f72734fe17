"""Named example groupoids, covers and cocycles shared by tests, fixtures and the corpus study."""
from itertools import combinations
from typing import Callable, Dict, Tuple

from src.actions import (
    RIGHT,
    GroupAction,
    GroupActionOnGroupoid,
    action_on_groupoid,
    group_action,
    translation_groupoid,
    trivial_action_on,
)
from src.charted import ChartedGroupoid, charted, with_trivial_charts
from src.descent import Cover, make_cover
from src.groupoid import FiniteGroupoid, b_group, disjoint_union, pair_groupoid, trivial_groupoid
from src.groups import (
    FiniteGroup,
    cyclic_group,
    dihedral_group,
    direct_product,
    permutation_group,
    symmetric_group,
)

SWAP = (1, 0)
STAY = (0, 1)


def bz(n: int) -> ChartedGroupoid:
    """B(Z/n) acting trivially on a one-point chart."""
    return with_trivial_charts(b_group(cyclic_group(n), f"B(Z{n})"))


def bz2() -> ChartedGroupoid:
    return bz(2)


def bz4_swap() -> ChartedGroupoid:
    """B(Z/4) with the generator swapping a two-point chart; S⁰ = {0, 2}."""
    return charted(b_group(cyclic_group(4), "B(Z4)"), [STAY], lambda a: SWAP if a % 2 else STAY)


def effective_bz2() -> ChartedGroupoid:
    return charted(b_group(cyclic_group(2), "B(Z2)"), [STAY], lambda a: SWAP if a else STAY)


def bz2xz2() -> ChartedGroupoid:
    return with_trivial_charts(b_group(direct_product(cyclic_group(2), cyclic_group(2)), "B(Z2xZ2)"))


def bs3() -> ChartedGroupoid:
    """B(S₃): nonabelian band with trivial center."""
    return with_trivial_charts(b_group(symmetric_group(3), "B(S3)"))


def bd4_reflect() -> ChartedGroupoid:
    """B(D₄) where reflections swap a two-point chart; S⁰ is the rotation subgroup Z/4."""
    d4 = dihedral_group(4)
    rotations = set(d4.generated([d4.index((1, 2, 3, 0))]))
    return charted(b_group(d4, "B(D4)"), [STAY], lambda a: STAY if a in rotations else SWAP)


def free_translation(n: int = 2) -> FiniteGroupoid:
    """Z/n acting on itself by translation: equivalent to a point."""
    zn = cyclic_group(n)
    return translation_groupoid(group_action(zn, range(n), lambda x, k: (x + k) % n, RIGHT, f"Z{n} on itself"))


def fixed_translation(n: int = 2, points: int = 1) -> FiniteGroupoid:
    """Z/n acting trivially on a set: a union of copies of B(Z/n)."""
    zn = cyclic_group(n)
    return translation_groupoid(group_action(zn, range(points), lambda x, k: x, RIGHT, f"Z{n} fixing"))


def pair(n: int = 3) -> FiniteGroupoid:
    return pair_groupoid(range(n), f"Pair{n}")


def mixed_stabilizers() -> ChartedGroupoid:
    """B(Z2) ⊔ B(Z3): framing cannot make the stabilizers uniform."""
    return with_trivial_charts(disjoint_union(b_group(cyclic_group(2)), b_group(cyclic_group(3)), "B(Z2)+B(Z3)"))


def circle_cover() -> Cover:
    """Three points, three arcs; every point lies in exactly two arcs."""
    return make_cover(["a", "b", "c"], [[0, 1], [1, 2], [2, 0]], "circle")


def interval_cover() -> Cover:
    return make_cover(["a", "b", "c"], [[0, 1], [1, 2]], "interval")


def mobius_cocycle(group: FiniteGroup = None) -> Tuple[Cover, FiniteGroup, Dict]:
    """One nontrivial transition on the circle: a bundle with no part-constant section."""
    group = group or cyclic_group(2)
    flip = next(a for a in group.elements if a != group.identity)
    e = group.identity
    return circle_cover(), group, {(0, 1): {1: e}, (1, 2): {2: e}, (0, 2): {0: flip}}


def cylinder_cocycle(group: FiniteGroup = None) -> Tuple[Cover, FiniteGroup, Dict]:
    group = group or cyclic_group(2)
    e = group.identity
    return circle_cover(), group, {(0, 1): {1: e}, (1, 2): {2: e}, (0, 2): {0: e}}


CHARTED: Dict[str, Callable[[], ChartedGroupoid]] = {
    "bz2": bz2,
    "bz4_swap": bz4_swap,
    "effective_bz2": effective_bz2,
    "bz2xz2": bz2xz2,
    "bs3": bs3,
    "bd4_reflect": bd4_reflect,
    "mixed_stabilizers": mixed_stabilizers,
}

GROUPOIDS: Dict[str, Callable[[], FiniteGroupoid]] = {
    "free_translation": free_translation,
    "fixed_translation": fixed_translation,
    "pair3": pair,
}


# ---------------------------------------------------------------------------
# Generated families
# ---------------------------------------------------------------------------

def alternating_group_4() -> FiniteGroup:
    return permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)], 4, "A4")


def small_groups(max_order: int = 12) -> Dict[str, FiniteGroup]:
    """Cyclic, dihedral, product and permutation groups of order at most max_order."""
    z = cyclic_group
    groups = {f"Z{n}": z(n) for n in range(1, max_order + 1)}
    groups.update({f"D{n}": dihedral_group(n) for n in range(3, max_order // 2 + 1)})
    for a, b in ((2, 2), (2, 3), (2, 4), (3, 3), (2, 6), (3, 4), (2, 8), (4, 4), (3, 6), (2, 10), (2, 12)):
        if a * b <= max_order:
            groups[f"Z{a}xZ{b}"] = direct_product(z(a), z(b), f"Z{a}xZ{b}")
    others = {
        "S3": lambda: symmetric_group(3),
        "Z2xZ2xZ2": lambda: direct_product(direct_product(z(2), z(2)), z(2), "Z2xZ2xZ2"),
        "A4": alternating_group_4,
        "Z2xD4": lambda: direct_product(z(2), dihedral_group(4), "Z2xD4"),
        "Z3xS3": lambda: direct_product(z(3), symmetric_group(3), "Z3xS3"),
        "S4": lambda: symmetric_group(4),
        "Z2xA4": lambda: direct_product(z(2), alternating_group_4(), "Z2xA4"),
        "Z3xD4": lambda: direct_product(z(3), dihedral_group(4), "Z3xD4"),
        "Z2xD6": lambda: direct_product(z(2), dihedral_group(6), "Z2xD6"),
    }
    orders = {"S3": 6, "Z2xZ2xZ2": 8, "A4": 12, "Z2xD4": 16, "Z3xS3": 18,
              "S4": 24, "Z2xA4": 24, "Z3xD4": 24, "Z2xD6": 24}
    groups.update({name: build() for name, build in others.items() if orders[name] <= max_order})
    return groups


def coset_action(group: FiniteGroup, generator: int) -> GroupAction:
    """`group` acting on the right cosets H·x of H = <generator> by (H·x)·k = H·xk."""
    sub = group.generated([generator])
    cosets, seen = [], set()
    for x in group.elements:
        if x not in seen:
            coset = tuple(sorted(group.mul(h, x) for h in sub))
            cosets.append(coset)
            seen.update(coset)
    where = {x: i for i, coset in enumerate(cosets) for x in coset}
    return group_action(group, cosets, lambda i, k: where[group.mul(cosets[i][0], k)], RIGHT,
                        f"{group.name} on cosets of <{group.label(generator)}>")


def coset_translations(max_order: int = 12, max_points: int = 6) -> Dict[str, Tuple[FiniteGroupoid, FiniteGroup]]:
    """
    Transitive translation groupoids K/H ⋊ K for cyclic H, each with H.
    Every one is equivalent to B(H).
    """
    out = {}
    for name, group in small_groups(max_order).items():
        seen = set()
        for g in group.elements:
            sub = group.generated([g])
            if sub in seen or group.order // len(sub) > max_points:
                continue
            seen.add(sub)
            action = coset_action(group, g)
            out[f"{name}/<{g}>"] = (translation_groupoid(action, f"{name}/<{g}>"),
                                    group.subgroup(sub, f"<{g}>"))
    return out


def fixed_translations(max_order: int = 6, max_points: int = 3) -> Dict[str, Tuple[FiniteGroupoid, FiniteGroup]]:
    """K fixing every point of a set: |X| copies of B(K)."""
    out = {}
    for name, group in small_groups(max_order).items():
        for n in range(1, max_points + 1):
            action = group_action(group, range(n), lambda x, k: x, RIGHT, f"{name} fixing {n}")
            out[f"{name} fixing {n}"] = (translation_groupoid(action), group)
    return out


def rotation(m: int, a: int) -> Tuple[int, ...]:
    return tuple((i + a) % m for i in range(m))


def parity(perm: Tuple[int, ...]) -> int:
    return sum(1 for i, j in combinations(range(len(perm)), 2) if perm[i] > perm[j]) % 2


def rotated_bz(n: int, m: int) -> ChartedGroupoid:
    """B(Z/n) rotating a chart of size m; needs m | n."""
    return charted(b_group(cyclic_group(n), f"B(Z{n})"), [range(m)], lambda a: rotation(m, a))


def labelled_bs3() -> ChartedGroupoid:
    """B(S₃) permuting a three-point chart by each element's own permutation: effective."""
    s3 = symmetric_group(3)
    return charted(b_group(s3, "B(S3)"), [range(3)], s3.label)


def signed_bs3() -> ChartedGroupoid:
    """B(S₃) where odd permutations swap a two-point chart; S⁰ = A₃."""
    s3 = symmetric_group(3)
    return charted(b_group(s3, "B(S3)"), [STAY], lambda a: SWAP if parity(s3.label(a)) else STAY)


def translation_with_effect(action: GroupAction, m: int, effect: Callable[[int], Tuple[int, ...]]) -> ChartedGroupoid:
    """X⋊K with the arrow (x, k) acting on a chart of size m by effect(k)."""
    k = action.group.order
    g = translation_groupoid(action)
    return charted(g, [range(m)] * g.n_objects, lambda a: effect(a % k))


def twisted_pair(n: int) -> ChartedGroupoid:
    """Pair groupoid on n points whose arrows swap a two-point chart between points of different parity."""
    return charted(pair_groupoid(range(n), f"Pair{n}"), [STAY] * n,
                   lambda a: SWAP if (a // n + a % n) % 2 else STAY)


def charted_family() -> Dict[str, ChartedGroupoid]:
    """Charted groupoids with chart sizes 1 to 3, effective, purely ineffective and in between."""
    family = {f"B(Z{n}) rotating {m}": rotated_bz(n, m)
              for n in range(1, 7) for m in (1, 2, 3) if n % m == 0}
    s3 = symmetric_group(3)
    family.update({
        "B(S3) labelled": labelled_bs3(),
        "B(S3) signed": signed_bs3(),
        "B(S3) trivial 2": with_trivial_charts(b_group(s3, "B(S3)"), 2),
        "Z3 on itself rotating 3": translation_with_effect(
            group_action(cyclic_group(3), range(3), lambda x, k: (x + k) % 3, RIGHT), 3, lambda k: rotation(3, k)),
        "Z2 fixing 2 swapping": translation_with_effect(
            group_action(cyclic_group(2), range(2), lambda x, k: x, RIGHT), 2, lambda k: rotation(2, k)),
        "Z4 on itself by parity": translation_with_effect(
            group_action(cyclic_group(4), range(4), lambda x, k: (x + k) % 4, RIGHT), 2, lambda k: rotation(2, k)),
        "Z6 on cosets of <2> rotating 3": translation_with_effect(
            coset_action(cyclic_group(6), 2), 3, lambda k: rotation(3, k)),
        "S3 on cosets of <1> labelled": translation_with_effect(coset_action(s3, 1), 3, s3.label),
        "Pair2 trivial 1": with_trivial_charts(pair_groupoid(range(2), "Pair2"), 1),
        "Pair3 trivial 2": with_trivial_charts(pair_groupoid(range(3), "Pair3"), 2),
        "Pair2 trivial 3": with_trivial_charts(pair_groupoid(range(2), "Pair2"), 3),
        "Pair3 twisted": twisted_pair(3),
    })
    return family


def rotate_objects(target: FiniteGroupoid, n: int) -> GroupActionOnGroupoid:
    """Z/n rotating the n points of a discrete groupoid."""
    return action_on_groupoid(cyclic_group(n), target, lambda x, k: (x + k) % n, lambda a, k: (a + k) % n,
                              f"rotate {n}")


def rotate_pair(target: FiniteGroupoid, n: int) -> GroupActionOnGroupoid:
    """Z/n rotating the pair groupoid on n points; arrow (y, x) has id y*n + x."""
    return action_on_groupoid(cyclic_group(n), target, lambda x, k: (x + k) % n,
                              lambda a, k: ((a // n + k) % n) * n + (a % n + k) % n, f"rotate {n}")


def reflect_pair(target: FiniteGroupoid, n: int) -> GroupActionOnGroupoid:
    """Z/2 reflecting the pair groupoid on n points by x -> -x."""
    return action_on_groupoid(cyclic_group(2), target, lambda x, k: (-x) % n if k else x,
                              lambda a, k: ((-(a // n)) % n) * n + (-(a % n)) % n if k else a, "reflect")


def scale_cyclic(target: FiniteGroupoid, n: int, u: int) -> GroupActionOnGroupoid:
    """Z/2 acting on B(Z/n) by a -> u·a, for a unit u with u² = 1 mod n."""
    return action_on_groupoid(cyclic_group(2), target, lambda x, k: x, lambda a, k: (a * u) % n if k else a,
                              f"scale {u}")


def commuting_action_pairs() -> Dict[str, Tuple[GroupActionOnGroupoid, GroupActionOnGroupoid]]:
    """Pairs of commuting actions on one groupoid, for the two-group semidirect check."""
    pairs = {}
    for n in (2, 3, 4):
        points = trivial_groupoid(range(n), f"{n} points")
        pairs[f"rotate {n} twice on points"] = (rotate_objects(points, n), rotate_objects(points, n))
    points = trivial_groupoid(range(3), "3 points")
    pairs["rotate 3 and Z2 on points"] = (rotate_objects(points, 3), trivial_action_on(cyclic_group(2), points))
    for n in (3, 4):
        bzn = b_group(cyclic_group(n))
        pairs[f"invert B(Z{n}) twice"] = (scale_cyclic(bzn, n, n - 1), scale_cyclic(bzn, n, n - 1))
    bz5 = b_group(cyclic_group(5))
    pairs["invert B(Z5) and Z3"] = (scale_cyclic(bz5, 5, 4), trivial_action_on(cyclic_group(3), bz5))
    bz8 = b_group(cyclic_group(8))
    pairs["scale B(Z8) by 3 and 5"] = (scale_cyclic(bz8, 8, 3), scale_cyclic(bz8, 8, 5))
    for n in (2, 3):
        pair_n = pair_groupoid(range(n), f"Pair{n}")
        pairs[f"rotate Pair{n} twice"] = (rotate_pair(pair_n, n), rotate_pair(pair_n, n))
    pair3 = pair_groupoid(range(3), "Pair3")
    pairs["rotate Pair3 and Z2"] = (rotate_pair(pair3, 3), trivial_action_on(cyclic_group(2), pair3))
    pair4 = pair_groupoid(range(4), "Pair4")
    pairs["rotate Pair4 by 2 and reflect"] = (
        action_on_groupoid(cyclic_group(2), pair4, lambda x, k: (x + 2 * k) % 4,
                           lambda a, k: ((a // 4 + 2 * k) % 4) * 4 + (a % 4 + 2 * k) % 4, "half turn"),
        reflect_pair(pair4, 4))
    return pairs


def small_groupoids() -> Dict[str, FiniteGroupoid]:
    """Groupoids with at most 12 arrows, several of them equivalent to one another."""
    z = cyclic_group
    point = trivial_groupoid(["*"], "point")
    return {
        "point": point,
        "2 points": trivial_groupoid(range(2), "2 points"),
        "Pair2": pair_groupoid(range(2), "Pair2"),
        "Pair3": pair_groupoid(range(3), "Pair3"),
        "B(Z2)": b_group(z(2)),
        "B(Z3)": b_group(z(3)),
        "B(Z4)": b_group(z(4)),
        "B(Z2xZ2)": b_group(direct_product(z(2), z(2))),
        "B(S3)": b_group(symmetric_group(3)),
        "Z2 on itself": free_translation(2),
        "Z3 on itself": free_translation(3),
        "Z2 fixing 2": fixed_translation(2, 2),
        "Z4 on cosets of <2>": translation_groupoid(coset_action(z(4), 2)),
        "B(Z2)+point": disjoint_union(b_group(z(2)), point),
        "B(Z2)+B(Z3)": disjoint_union(b_group(z(2)), b_group(z(3))),
        "Pair2+B(Z2)": disjoint_union(pair_groupoid(range(2), "Pair2"), b_group(z(2))),
    }
