"""
Group and groupoid actions, and the constructions built from them.

Id conventions for constructed groupoids:
- translation_groupoid: arrow (x, k) has id x*|K| + k
- semidirect_group:     arrow (g, k) has id g*|K| + k; objects keep their ids
- semidirect_space:     arrows enumerated point by point in id order
"""
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.errors import Refusal, StructureError
from src.groupoid import (
    FiniteGroupoid,
    StrictHom,
    build_groupoid,
    check_strict_hom,
    is_strict_iso,
    isotropy_arrows,
)
from src.groups import FiniteGroup, direct_product, is_homomorphism
from src.reports import ValidationReport

RIGHT = "right"
LEFT = "left"


@dataclass(frozen=True, eq=False)
class GroupAction:
    """A finite group acting on a finite set. table[x, k] is x·k (right) or k·x (left)."""
    group: FiniteGroup
    carrier: Tuple[Hashable, ...]
    table: np.ndarray
    side: str = RIGHT
    name: str = "action"

    def act(self, x: int, k: int) -> int:
        return int(self.table[x, k])

    def orbits(self) -> Tuple[Tuple[int, ...], ...]:
        seen, out = set(), []
        for x in range(len(self.carrier)):
            if x in seen:
                continue
            orbit = sorted({self.act(x, k) for k in self.group.elements})
            seen.update(orbit)
            out.append(tuple(orbit))
        return tuple(out)

    def point_stabilizer(self, x: int) -> Tuple[int, ...]:
        return tuple(k for k in self.group.elements if self.act(x, k) == x)


def group_action(group: FiniteGroup, carrier: Sequence[Hashable], fn: Callable[[int, int], int],
                 side: str = RIGHT, name: str = "action") -> GroupAction:
    """Tabulate fn(x, k) over point ids x and element ids k."""
    if side not in (RIGHT, LEFT):
        raise StructureError(f"unknown action side {side!r}")
    carrier = tuple(carrier)
    table = np.array([[fn(x, k) for k in group.elements] for x in range(len(carrier))],
                     dtype=np.int64).reshape(len(carrier), group.order)
    table.setflags(write=False)
    return GroupAction(group, carrier, table, side, name)


def validate_action(action) -> ValidationReport:
    """Validate any of the three action kinds."""
    if isinstance(action, GroupAction):
        return _validate_group_action(action)
    if isinstance(action, GroupoidAction):
        return validate_groupoid_action(action)
    if isinstance(action, GroupActionOnGroupoid):
        return _validate_action_on_groupoid(action)
    raise TypeError(f"not an action: {type(action).__name__}")


def _validate_group_action(action: GroupAction) -> ValidationReport:
    report = ValidationReport(subject=action.name)
    k = action.group
    t = action.table
    n = len(action.carrier)
    if t.shape != (n, k.order) or (n and (t.min() < 0 or t.max() >= n)):
        report.add_structural("action table shape", t.shape)
        return report
    pts = np.arange(n)
    for x in np.nonzero(t[:, k.identity] != pts)[0]:
        report.add("identity acts trivially", action.carrier[int(x)])
    # right: (x·a)·b = x·(ab); left: a·(b·x) = (ab)·x
    for a in k.elements:
        for b in k.elements:
            report.checks += n
            if action.side == RIGHT:
                lhs, ab = t[t[:, a], b], k.mul(a, b)
            else:
                lhs, ab = t[t[:, b], a], k.mul(a, b)
            bad = np.nonzero(lhs != t[:, ab])[0]
            if len(bad):
                report.add("compatibility", action.carrier[int(bad[0])], k.label(a), k.label(b))
    return report


def translation_groupoid(action: GroupAction, name: Optional[str] = None) -> FiniteGroupoid:
    """X⋊K: arrows (x, k) with s = x·k, t = x and (x, k)(x·k, h) = (x, kh)."""
    if action.side != RIGHT:
        raise StructureError(f"{action.name}: translation groupoid needs a right action")
    k = action.group
    n = len(action.carrier)
    arrows = [(x, a) for x in range(n) for a in k.elements]
    g = build_groupoid(range(n), arrows,
                       src=lambda xa: action.act(*xa), tgt=lambda xa: xa[0],
                       compose=lambda g, h: (g[0], k.mul(g[1], h[1])),
                       unit=lambda x: (x, k.identity),
                       inverse=lambda xa: (action.act(*xa), k.inv(xa[1])),
                       name=name or f"{_carrier_name(action)}x{k.name}")
    return _with_keys(g, action.carrier, [(action.carrier[x], k.label(a)) for x, a in arrows])


def _carrier_name(action) -> str:
    return f"X{len(action.carrier)}"


def _with_keys(g: FiniteGroupoid, object_keys, arrow_keys) -> FiniteGroupoid:
    return FiniteGroupoid(tuple(object_keys), tuple(arrow_keys), g.src, g.tgt, g.unit, g.inv, g.comp, g.name)


# ---------------------------------------------------------------------------
# Groupoid actions on sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupoidAction:
    """
    A groupoid acting on a set over a base map.

    Right: p·g is defined iff base(p) = t(g), and base(p·g) = s(g).
    Left:  g·p is defined iff base(p) = s(g), and base(g·p) = t(g).
    `table` is keyed by (point, arrow) for both sides.
    """
    groupoid: FiniteGroupoid
    carrier: Tuple[Hashable, ...]
    base: Tuple[int, ...]
    table: Mapping[Tuple[int, int], int]
    side: str = RIGHT
    name: str = "action"

    def act(self, p: int, g: int) -> int:
        try:
            return self.table[(p, g)]
        except KeyError:
            raise StructureError(f"{self.name}: arrow {g} cannot act on point {p}") from None

    def defined(self, p: int, g: int) -> bool:
        anchor = self.groupoid.tgt[g] if self.side == RIGHT else self.groupoid.src[g]
        return self.base[p] == anchor

    def acting_arrows(self, p: int) -> Tuple[int, ...]:
        x = self.base[p]
        return self.groupoid.arrows_into(x) if self.side == RIGHT else self.groupoid.arrows_from(x)


def groupoid_action(groupoid: FiniteGroupoid, carrier: Sequence[Hashable], base: Sequence[int],
                    fn: Callable[[int, int], int], side: str = RIGHT,
                    name: str = "action") -> GroupoidAction:
    """Tabulate fn(p, g) on every pair where the action is defined."""
    carrier, base = tuple(carrier), tuple(base)
    stub = GroupoidAction(groupoid, carrier, base, {}, side, name)
    table = {(p, g): fn(p, g) for p in range(len(carrier)) for g in stub.acting_arrows(p)}
    return GroupoidAction(groupoid, carrier, base, table, side, name)


def validate_groupoid_action(action: GroupoidAction) -> ValidationReport:
    g = action.groupoid
    report = ValidationReport(subject=action.name)
    n = len(action.carrier)
    if len(action.base) != n or any(not 0 <= x < g.n_objects for x in action.base):
        report.add_structural("base map")
        return report
    for (p, a), q in action.table.items():
        if not (0 <= p < n and 0 <= a < g.n_arrows and 0 <= q < n):
            report.add_structural("dangling action entry", p, a, q)
    if report.structural:
        return report
    for (p, a) in action.table:
        if not action.defined(p, a):
            report.add("action defined off the base", action.carrier[p], g.arrow_keys[a])
    right = action.side == RIGHT
    for p in range(n):
        for a in action.acting_arrows(p):
            report.checks += 1
            q = action.table.get((p, a))
            if q is None:
                report.add("action not total", action.carrier[p], g.arrow_keys[a])
                continue
            if action.base[q] != (g.src[a] if right else g.tgt[a]):
                report.add("base equivariance", action.carrier[p], g.arrow_keys[a])
        if action.table.get((p, g.unit[action.base[p]])) != p:
            report.add("unit acts trivially", action.carrier[p])
    if report.violations:
        return report
    for p in range(n):
        for a in action.acting_arrows(p):
            q = action.table[(p, a)]
            for b in action.acting_arrows(q):
                report.checks += 1
                # right: (p a) b = p (a b); left: b (a p) = (b a) p
                ab = g.mul(a, b) if right else g.mul(b, a)
                if action.table[(q, b)] != action.table[(p, ab)]:
                    report.add("compatibility", action.carrier[p], g.arrow_keys[a], g.arrow_keys[b])
    return report


def semidirect_space(action: GroupoidAction, name: Optional[str] = None) -> Tuple[FiniteGroupoid, StrictHom]:
    """
    X⋊G (right action) or G⋉X (left action), with the base map extended
    to a strict homomorphism onto G.

    Right: arrows (p, g), s = p·g, t = p, (p, g)(p·g, h) = (p, gh).
    Left:  arrows (g, p), s = p, t = g·p, (g, h·q)(h, q) = (gh, q).
    """
    g = action.groupoid
    n = len(action.carrier)
    if action.side == RIGHT:
        arrows = [(p, a) for p in range(n) for a in action.acting_arrows(p)]
        semi = build_groupoid(range(n), arrows,
                              src=lambda pa: action.act(*pa), tgt=lambda pa: pa[0],
                              compose=lambda x, y: (x[0], g.mul(x[1], y[1])),
                              unit=lambda p: (p, g.unit[action.base[p]]),
                              inverse=lambda pa: (action.act(*pa), g.inv[pa[1]]),
                              name=name or f"{_carrier_name(action)}x{g.name}")
        keys = [(action.carrier[p], g.arrow_keys[a]) for p, a in arrows]
        on_arrows = tuple(a for _, a in arrows)
    else:
        arrows = [(a, p) for p in range(n) for a in action.acting_arrows(p)]
        semi = build_groupoid(range(n), arrows,
                              src=lambda ap: ap[1], tgt=lambda ap: action.act(ap[1], ap[0]),
                              compose=lambda x, y: (g.mul(x[0], y[0]), y[1]),
                              unit=lambda p: (g.unit[action.base[p]], p),
                              inverse=lambda ap: (g.inv[ap[0]], action.act(ap[1], ap[0])),
                              name=name or f"{g.name}x{_carrier_name(action)}")
        keys = [(g.arrow_keys[a], action.carrier[p]) for a, p in arrows]
        on_arrows = tuple(a for a, _ in arrows)
    semi = _with_keys(semi, action.carrier, keys)
    return semi, StrictHom(semi, g, action.base, on_arrows, "pi")


def stabilizer_space(g: FiniteGroupoid) -> GroupoidAction:
    """S_G: isotropy arrows with base s = t, G acting on the right by h·a = a⁻¹ h a."""
    iso = isotropy_arrows(g)
    pos = {h: i for i, h in enumerate(iso)}
    return groupoid_action(g, [g.arrow_keys[h] for h in iso], [g.src[h] for h in iso],
                           lambda p, a: pos[g.mul_all(g.inv[a], iso[p], a)],
                           side=RIGHT, name=f"S({g.name})")


# ---------------------------------------------------------------------------
# Groups acting on groupoids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupActionOnGroupoid:
    """K acting on G on the right by automorphisms: on_objects[x, k] = x·k, on_arrows[g, k] = g·k."""
    group: FiniteGroup
    target: FiniteGroupoid
    on_objects: np.ndarray
    on_arrows: np.ndarray
    name: str = "action"

    def obj(self, x: int, k: int) -> int:
        return int(self.on_objects[x, k])

    def arr(self, g: int, k: int) -> int:
        return int(self.on_arrows[g, k])


def action_on_groupoid(group: FiniteGroup, target: FiniteGroupoid,
                       on_objects: Callable[[int, int], int], on_arrows: Callable[[int, int], int],
                       name: str = "action") -> GroupActionOnGroupoid:
    objs = np.array([[on_objects(x, k) for k in group.elements] for x in target.objects],
                    dtype=np.int64).reshape(target.n_objects, group.order)
    arrs = np.array([[on_arrows(a, k) for k in group.elements] for a in target.arrows],
                    dtype=np.int64).reshape(target.n_arrows, group.order)
    objs.setflags(write=False)
    arrs.setflags(write=False)
    return GroupActionOnGroupoid(group, target, objs, arrs, name)


def trivial_action_on(group: FiniteGroup, target: FiniteGroupoid) -> GroupActionOnGroupoid:
    return action_on_groupoid(group, target, lambda x, k: x, lambda a, k: a, f"trivial {group.name}")


def _validate_action_on_groupoid(action: GroupActionOnGroupoid) -> ValidationReport:
    k, g = action.group, action.target
    report = ValidationReport(subject=action.name)
    if action.on_objects.shape != (g.n_objects, k.order) or action.on_arrows.shape != (g.n_arrows, k.order):
        report.add_structural("action table shape")
        return report
    for what, tab, size in (("object", action.on_objects, g.n_objects), ("arrow", action.on_arrows, g.n_arrows)):
        if tab.size and (tab.min() < 0 or tab.max() >= size):
            report.add_structural(f"dangling {what} image")
    if report.structural:
        return report
    for what, tab in (("object", action.on_objects), ("arrow", action.on_arrows)):
        sub = GroupAction(k, tuple(range(tab.shape[0])), tab, RIGHT, f"{action.name} on {what}s")
        report.merge(_validate_group_action(sub), prefix=f"{what} ")
    for a in k.elements:
        for x in g.objects:
            report.checks += 1
            if action.arr(g.unit[x], a) != g.unit[action.obj(x, a)]:
                report.add("preserves units", g.object_keys[x], k.label(a))
        for b in g.arrows:
            report.checks += 1
            ba = action.arr(b, a)
            if g.src[ba] != action.obj(g.src[b], a) or g.tgt[ba] != action.obj(g.tgt[b], a):
                report.add("preserves source/target", g.arrow_keys[b], k.label(a))
        if report.violations:
            continue
        for (b, c), bc in g.comp.items():
            report.checks += 1
            if action.arr(bc, a) != g.mul(action.arr(b, a), action.arr(c, a)):
                report.add("preserves composition", g.arrow_keys[b], g.arrow_keys[c], k.label(a))
    return report


def semidirect_group(action: GroupActionOnGroupoid, name: Optional[str] = None) -> FiniteGroupoid:
    """
    G⋊K: objects of G, arrows (g, k) with s(g, k) = s(g)·k, t(g, k) = t(g),
    (g, k)(g', k') = (g (g'·k⁻¹), kk'), unit (1_x, e), inverse (g⁻¹·k, k⁻¹).
    """
    k, g = action.group, action.target
    arrows = [(a, c) for a in g.arrows for c in k.elements]

    def compose(x, y):
        (a, c), (b, d) = x, y
        return g.mul(a, action.arr(b, k.inv(c))), k.mul(c, d)

    semi = build_groupoid(g.objects, arrows,
                          src=lambda ac: action.obj(g.src[ac[0]], ac[1]),
                          tgt=lambda ac: g.tgt[ac[0]],
                          compose=compose,
                          unit=lambda x: (g.unit[x], k.identity),
                          inverse=lambda ac: (action.arr(g.inv[ac[0]], ac[1]), k.inv(ac[1])),
                          name=name or f"{g.name}x{k.name}")
    return _with_keys(semi, g.object_keys, [(g.arrow_keys[a], k.label(c)) for a, c in arrows])


def semidirect_arrow(action: GroupActionOnGroupoid, g: int, k: int) -> int:
    """Id of (g, k) in semidirect_group(action)."""
    return g * action.group.order + k


def split_semidirect_arrow(action: GroupActionOnGroupoid, a: int) -> Tuple[int, int]:
    return divmod(a, action.group.order)


def actions_commute(first: GroupActionOnGroupoid, second: GroupActionOnGroupoid) -> Optional[tuple]:
    """None when the actions commute elementwise, else a witness."""
    if first.target is not second.target:
        raise StructureError("actions are on different groupoids")
    g = first.target
    for k in first.group.elements:
        for l in second.group.elements:
            for x in g.objects:
                if second.obj(first.obj(x, k), l) != first.obj(second.obj(x, l), k):
                    return ("object", g.object_keys[x], first.group.label(k), second.group.label(l))
            for a in g.arrows:
                if second.arr(first.arr(a, k), l) != first.arr(second.arr(a, l), k):
                    return ("arrow", g.arrow_keys[a], first.group.label(k), second.group.label(l))
    return None


def product_action(first: GroupActionOnGroupoid, second: GroupActionOnGroupoid) -> GroupActionOnGroupoid:
    """K x L acting by g·(k, l) = (g·k)·l; requires commuting actions."""
    witness = actions_commute(first, second)
    if witness is not None:
        raise Refusal("actions do not commute", witness=witness)
    kl = direct_product(first.group, second.group)
    m = second.group.order
    return action_on_groupoid(kl, first.target,
                              lambda x, c: second.obj(first.obj(x, c // m), c % m),
                              lambda a, c: second.arr(first.arr(a, c // m), c % m),
                              f"{first.name}x{second.name}")


def lift_action(inner: GroupActionOnGroupoid, outer: GroupActionOnGroupoid,
                inner_groupoid: Optional[FiniteGroupoid] = None) -> GroupActionOnGroupoid:
    """L acting on G⋊K by (g, k)·l = (g·l, k), for L commuting with K."""
    semi = inner_groupoid if inner_groupoid is not None else semidirect_group(inner)
    m = inner.group.order
    return action_on_groupoid(outer.group, semi,
                              lambda x, l: outer.obj(x, l),
                              lambda a, l: outer.arr(a // m, l) * m + a % m,
                              f"{outer.name} on {semi.name}")


@dataclass(frozen=True, eq=False)
class TwoGroupSemidirect:
    """(G⋊K)⋊L ≅ G⋊(K×L), with every table of the isomorphism checked."""
    inner: FiniteGroupoid
    lifted: GroupActionOnGroupoid
    iterated: FiniteGroupoid
    combined_action: GroupActionOnGroupoid
    combined: FiniteGroupoid
    iso: StrictHom
    report: ValidationReport

    @property
    def verified(self) -> bool:
        return self.report.ok


def check_two_group_semidirect(first: GroupActionOnGroupoid, second: GroupActionOnGroupoid,
                               inner: Optional[FiniteGroupoid] = None) -> TwoGroupSemidirect:
    """
    Build ((g, k), l) -> (g, (k, l)) from (G⋊K)⋊L to G⋊(K×L) and verify it.

    Args:
        first: K acting on G
        second: L acting on G, commuting with `first`
        inner: a prebuilt G⋊K to reuse

    Raises:
        Refusal: the actions do not commute (witness names the offending element)
    """
    combined_action = product_action(first, second)
    inner = inner if inner is not None else semidirect_group(first)
    lifted = lift_action(first, second, inner)
    iterated = semidirect_group(lifted)
    combined = semidirect_group(combined_action)
    k, l = first.group.order, second.group.order
    on_arrows = []
    for a in iterated.arrows:
        gk, c = divmod(a, l)
        g, b = divmod(gk, k)
        on_arrows.append(g * k * l + b * l + c)
    iso = StrictHom(iterated, combined, tuple(iterated.objects), tuple(on_arrows), "reassociate")
    report = check_strict_hom(iso)
    report.subject = "two-group semidirect isomorphism"
    if report.ok and not is_strict_iso(iso):
        report.add("bijectivity")
    return TwoGroupSemidirect(inner, lifted, iterated, combined_action, combined, iso, report)


def semidirect_map(phi: StrictHom, source: GroupActionOnGroupoid, target: GroupActionOnGroupoid,
                   rho: Sequence[int], name: str = "phi x rho",
                   domain: Optional[FiniteGroupoid] = None,
                   codomain: Optional[FiniteGroupoid] = None) -> StrictHom:
    """
    (g, k) -> (phi(g), rho(k)) from G⋊K to G'⋊K'.

    Requires rho a group homomorphism and phi(g·k) = phi(g)·rho(k).
    """
    if not is_homomorphism(source.group, target.group, rho):
        raise Refusal("group map is not a homomorphism", witness=name)
    g = source.target
    for k in source.group.elements:
        for x in g.objects:
            if phi.obj(source.obj(x, k)) != target.obj(phi.obj(x), rho[k]):
                raise Refusal("map is not equivariant", witness=(g.object_keys[x], source.group.label(k)))
        for a in g.arrows:
            if phi(source.arr(a, k)) != target.arr(phi(a), rho[k]):
                raise Refusal("map is not equivariant", witness=(g.arrow_keys[a], source.group.label(k)))
    dom = domain if domain is not None else semidirect_group(source)
    cod = codomain if codomain is not None else semidirect_group(target)
    m, m2 = source.group.order, target.group.order
    return StrictHom(dom, cod, phi.on_objects,
                     tuple(phi(a // m) * m2 + rho[a % m] for a in dom.arrows), name)
