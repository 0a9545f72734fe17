"""
Finite groupoids, strict homomorphisms and the basic constructions.

Objects and arrows are dense integer ids. Composition follows m(g, h) = gh,
defined when s(g) = t(h), with s(gh) = s(h) and t(gh) = t(g).
Every groupoid also carries `object_keys` / `arrow_keys`: structured names
(tuples for constructed groupoids) used for lookup and for text output.
"""
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.config import check_size
from src.errors import StructureError
from src.groups import FiniteGroup
from src.reports import ValidationReport


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """Table-backed finite groupoid. Tables may be incomplete until validated."""
    object_keys: Tuple[Hashable, ...]
    arrow_keys: Tuple[Hashable, ...]
    src: Tuple[int, ...]
    tgt: Tuple[int, ...]
    unit: Tuple[Optional[int], ...]
    inv: Tuple[Optional[int], ...]
    comp: Mapping[Tuple[int, int], int]
    name: str = "G"

    def __repr__(self) -> str:
        return f"FiniteGroupoid({self.name}, objects={self.n_objects}, arrows={self.n_arrows})"

    @property
    def n_objects(self) -> int:
        return len(self.object_keys)

    @property
    def n_arrows(self) -> int:
        return len(self.arrow_keys)

    @property
    def objects(self) -> range:
        return range(self.n_objects)

    @property
    def arrows(self) -> range:
        return range(self.n_arrows)

    @cached_property
    def _object_index(self) -> Dict[Hashable, int]:
        return {k: i for i, k in enumerate(self.object_keys)}

    @cached_property
    def _arrow_index(self) -> Dict[Hashable, int]:
        return {k: i for i, k in enumerate(self.arrow_keys)}

    def object_id(self, key: Hashable) -> int:
        try:
            return self._object_index[key]
        except KeyError:
            raise StructureError(f"{self.name}: unknown object {key!r}") from None

    def arrow_id(self, key: Hashable) -> int:
        try:
            return self._arrow_index[key]
        except KeyError:
            raise StructureError(f"{self.name}: unknown arrow {key!r}") from None

    def s(self, g: int) -> int:
        return self.src[g]

    def t(self, g: int) -> int:
        return self.tgt[g]

    def u(self, x: int) -> int:
        return self.unit[x]

    def i(self, g: int) -> int:
        return self.inv[g]

    def composable(self, g: int, h: int) -> bool:
        return self.src[g] == self.tgt[h]

    def mul(self, g: int, h: int) -> int:
        try:
            return self.comp[(g, h)]
        except KeyError:
            raise StructureError(f"{self.name}: arrows {g} and {h} are not composable") from None

    def mul_all(self, *arrows: int) -> int:
        out = arrows[0]
        for g in arrows[1:]:
            out = self.mul(out, g)
        return out

    @cached_property
    def _hom_table(self) -> Dict[Tuple[int, int], Tuple[int, ...]]:
        table: Dict[Tuple[int, int], List[int]] = defaultdict(list)
        for g in self.arrows:
            table[(self.src[g], self.tgt[g])].append(g)
        return {k: tuple(v) for k, v in table.items()}

    def hom(self, x: int, y: int) -> Tuple[int, ...]:
        """Arrows x -> y (source x, target y)."""
        return self._hom_table.get((x, y), ())

    @cached_property
    def _by_target(self) -> Dict[int, Tuple[int, ...]]:
        table: Dict[int, List[int]] = defaultdict(list)
        for g in self.arrows:
            table[self.tgt[g]].append(g)
        return {k: tuple(v) for k, v in table.items()}

    @cached_property
    def _by_source(self) -> Dict[int, Tuple[int, ...]]:
        table: Dict[int, List[int]] = defaultdict(list)
        for g in self.arrows:
            table[self.src[g]].append(g)
        return {k: tuple(v) for k, v in table.items()}

    def arrows_into(self, x: int) -> Tuple[int, ...]:
        return self._by_target.get(x, ())

    def arrows_from(self, x: int) -> Tuple[int, ...]:
        return self._by_source.get(x, ())

    def isotropy(self, x: int) -> Tuple[int, ...]:
        return self.hom(x, x)

    def composable_pairs(self) -> Iterable[Tuple[int, int]]:
        for h in self.arrows:
            for g in self.arrows_from(self.tgt[h]):
                yield g, h

    def object_label(self, x: int) -> str:
        return key_text(self.object_keys[x])

    def arrow_label(self, g: int) -> str:
        return key_text(self.arrow_keys[g])


def key_text(key: Hashable) -> str:
    """Compact text form of a structured key: tuples as a.b.c, no spaces."""
    if isinstance(key, tuple):
        return "(" + ",".join(key_text(k) for k in key) + ")"
    return str(key).replace(" ", "_")


@dataclass(frozen=True, eq=False)
class StrictHom:
    """A functor between finite groupoids given by object and arrow maps."""
    domain: FiniteGroupoid
    codomain: FiniteGroupoid
    on_objects: Tuple[int, ...]
    on_arrows: Tuple[int, ...]
    name: str = "phi"

    def obj(self, x: int) -> int:
        return self.on_objects[x]

    def __call__(self, g: int) -> int:
        return self.on_arrows[g]


@dataclass(frozen=True)
class CoarseQuotient:
    """Connected components of a groupoid; classes ordered by minimal object id."""
    classes: Tuple[Tuple[int, ...], ...]
    class_of: Tuple[int, ...]

    @property
    def representatives(self) -> Tuple[int, ...]:
        return tuple(c[0] for c in self.classes)

    def __len__(self) -> int:
        return len(self.classes)


class UnionFind:
    """Disjoint sets with union by rank; `find` returns the class root."""

    def __init__(self, items: Iterable[Hashable]):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in self.parent}

    def find(self, x: Hashable) -> Hashable:
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x: Hashable, y: Hashable) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x

    def classes(self, order: Sequence[Hashable]) -> List[List[Hashable]]:
        """Classes in order of their first member in `order`, members in that order."""
        groups: Dict[Hashable, List[Hashable]] = {}
        for x in order:
            groups.setdefault(self.find(x), []).append(x)
        return list(groups.values())


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------

def build_groupoid(objects: Sequence[Hashable], arrows: Sequence[Hashable],
                   src: Callable[[Hashable], Hashable], tgt: Callable[[Hashable], Hashable],
                   compose: Callable[[Hashable, Hashable], Hashable],
                   unit: Callable[[Hashable], Hashable], inverse: Callable[[Hashable], Hashable],
                   name: str = "G") -> FiniteGroupoid:
    """
    Tabulate a groupoid from structure maps on keys.

    Ids follow the order of `objects` and `arrows`. `compose(g, h)` is called
    exactly on pairs with src(g) == tgt(h).
    """
    objects = tuple(objects)
    arrows = tuple(arrows)
    check_size(len(arrows), f"{name} arrows")
    obj_index = {k: i for i, k in enumerate(objects)}
    arr_index = {k: i for i, k in enumerate(arrows)}
    if len(obj_index) != len(objects) or len(arr_index) != len(arrows):
        raise StructureError(f"{name}: duplicate keys")

    def lookup(index: Dict[Hashable, int], key: Hashable, what: str) -> int:
        try:
            return index[key]
        except KeyError:
            raise StructureError(f"{name}: {what} {key!r} is not declared") from None

    s = tuple(lookup(obj_index, src(a), "object") for a in arrows)
    t = tuple(lookup(obj_index, tgt(a), "object") for a in arrows)
    u = tuple(lookup(arr_index, unit(x), "arrow") for x in objects)
    i = tuple(lookup(arr_index, inverse(a), "arrow") for a in arrows)
    by_target: Dict[int, List[int]] = defaultdict(list)
    for h, x in enumerate(t):
        by_target[x].append(h)
    check_size(sum(len(by_target[s[g]]) for g in range(len(arrows))), f"{name} composable pairs")
    comp = {}
    for g, gk in enumerate(arrows):
        for h in by_target[s[g]]:
            comp[(g, h)] = lookup(arr_index, compose(gk, arrows[h]), "arrow")
    return FiniteGroupoid(objects, arrows, s, t, u, i, comp, name)


def trivial_groupoid(points: Iterable[Hashable], name: str = "M") -> FiniteGroupoid:
    """Units only: the set X viewed as a groupoid."""
    points = tuple(points)
    return build_groupoid(points, points, lambda a: a, lambda a: a, lambda g, h: g,
                          lambda x: x, lambda a: a, name)


def b_group(group: FiniteGroup, name: Optional[str] = None) -> FiniteGroupoid:
    """One object `*` with the group elements as arrows."""
    return FiniteGroupoid(
        object_keys=("*",),
        arrow_keys=group.labels,
        src=(0,) * group.order,
        tgt=(0,) * group.order,
        unit=(group.identity,),
        inv=tuple(group.inv(a) for a in group.elements),
        comp={(a, b): group.mul(a, b) for a in group.elements for b in group.elements},
        name=name or f"B({group.name})",
    )


def pair_groupoid(points: Iterable[Hashable], name: str = "Pair") -> FiniteGroupoid:
    """Exactly one arrow (y, x): x -> y between any two points."""
    points = tuple(points)
    return build_groupoid(points, list(product(points, points)),
                          lambda a: a[1], lambda a: a[0], lambda g, h: (g[0], h[1]),
                          lambda x: (x, x), lambda a: (a[1], a[0]), name)


def disjoint_union(g: FiniteGroupoid, h: FiniteGroupoid, name: Optional[str] = None) -> FiniteGroupoid:
    """G ⊔ H with keys tagged (0, key) and (1, key)."""
    n, m = g.n_objects, g.n_arrows
    comp = dict(g.comp)
    comp.update({(a + m, b + m): c + m for (a, b), c in h.comp.items()})
    return FiniteGroupoid(
        object_keys=tuple((0, k) for k in g.object_keys) + tuple((1, k) for k in h.object_keys),
        arrow_keys=tuple((0, k) for k in g.arrow_keys) + tuple((1, k) for k in h.arrow_keys),
        src=g.src + tuple(x + n for x in h.src),
        tgt=g.tgt + tuple(x + n for x in h.tgt),
        unit=g.unit + tuple(a + m for a in h.unit),
        inv=g.inv + tuple(a + m for a in h.inv),
        comp=comp,
        name=name or f"{g.name}+{h.name}",
    )


def opposite(g: FiniteGroupoid) -> FiniteGroupoid:
    """Same arrows with source and target exchanged."""
    return FiniteGroupoid(g.object_keys, g.arrow_keys, g.tgt, g.src, g.unit, g.inv,
                          {(a, b): c for (b, a), c in g.comp.items()}, f"{g.name}^op")


def relabel(g: FiniteGroupoid, object_perm: Sequence[int], arrow_perm: Sequence[int],
            name: Optional[str] = None) -> FiniteGroupoid:
    """Renumber ids: old object x becomes object_perm[x], old arrow a becomes arrow_perm[a]."""
    if sorted(object_perm) != list(g.objects) or sorted(arrow_perm) != list(g.arrows):
        raise StructureError("relabel needs permutations of the object and arrow ids")
    op, ap = list(object_perm), list(arrow_perm)

    def move(values, perm, keys):
        out = [None] * len(keys)
        for old, v in enumerate(values):
            out[perm[old]] = v
        return tuple(out)

    return FiniteGroupoid(
        object_keys=move(g.object_keys, op, g.object_keys),
        arrow_keys=move(g.arrow_keys, ap, g.arrow_keys),
        src=move([op[x] for x in g.src], ap, g.arrow_keys),
        tgt=move([op[x] for x in g.tgt], ap, g.arrow_keys),
        unit=move([ap[a] for a in g.unit], op, g.object_keys),
        inv=move([ap[a] for a in g.inv], ap, g.arrow_keys),
        comp={(ap[a], ap[b]): ap[c] for (a, b), c in g.comp.items()},
        name=name or g.name,
    )


def relabel_hom(g: FiniteGroupoid, object_perm: Sequence[int], arrow_perm: Sequence[int]) -> StrictHom:
    """The strict isomorphism G -> relabel(G, ...)."""
    target = relabel(g, object_perm, arrow_perm)
    return StrictHom(g, target, tuple(object_perm), tuple(arrow_perm), "relabel")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_groupoid(g: FiniteGroupoid) -> ValidationReport:
    """
    Check every groupoid axiom.

    Dangling ids are structural defects; when any exist, axiom checks are
    skipped since the tables cannot be evaluated.
    """
    report = ValidationReport(subject=g.name)
    n, m = g.n_objects, g.n_arrows
    if len(g.src) != m or len(g.tgt) != m or len(g.inv) != m or len(g.unit) != n:
        report.add_structural("table length", len(g.src), len(g.tgt), len(g.inv), len(g.unit))
        return report
    for a in g.arrows:
        for what, x in (("src", g.src[a]), ("tgt", g.tgt[a])):
            if not isinstance(x, int) or not 0 <= x < n:
                report.add_structural(f"dangling {what}", g.arrow_keys[a], x)
        if g.inv[a] is not None and not 0 <= g.inv[a] < m:
            report.add_structural("dangling inv", g.arrow_keys[a], g.inv[a])
    for x in g.objects:
        if g.unit[x] is not None and not 0 <= g.unit[x] < m:
            report.add_structural("dangling unit", g.object_keys[x], g.unit[x])
    for (a, b), c in g.comp.items():
        if not (0 <= a < m and 0 <= b < m and 0 <= c < m):
            report.add_structural("dangling comp", a, b, c)
    if report.structural:
        return report

    for x in g.objects:
        e = g.unit[x]
        report.checks += 1
        if e is None:
            report.add("unit missing", g.object_keys[x])
        elif g.src[e] != x or g.tgt[e] != x:
            report.add("unit endpoints", g.object_keys[x], g.arrow_keys[e])
    for a in g.arrows:
        report.checks += 1
        b = g.inv[a]
        if b is None:
            report.add("inv missing", g.arrow_keys[a])
        elif g.src[b] != g.tgt[a] or g.tgt[b] != g.src[a]:
            report.add("inv endpoints", g.arrow_keys[a], g.arrow_keys[b])
    for (a, b) in g.comp:
        if g.src[a] != g.tgt[b]:
            report.add("comp on non-composable pair", g.arrow_keys[a], g.arrow_keys[b])
    if report.violations:
        return report

    for b in g.arrows:
        for a in g.arrows_from(g.tgt[b]):
            report.checks += 1
            c = g.comp.get((a, b))
            if c is None:
                report.add("comp not total", g.arrow_keys[a], g.arrow_keys[b])
            elif g.src[c] != g.src[b] or g.tgt[c] != g.tgt[a]:
                report.add("comp endpoints", g.arrow_keys[a], g.arrow_keys[b])
    if report.violations:
        return report

    for a in g.arrows:
        report.checks += 1
        if g.comp[(a, g.unit[g.src[a]])] != a or g.comp[(g.unit[g.tgt[a]], a)] != a:
            report.add("unit law", g.arrow_keys[a])
        b = g.inv[a]
        if g.comp[(b, a)] != g.unit[g.src[a]] or g.comp[(a, b)] != g.unit[g.tgt[a]]:
            report.add("inverse law", g.arrow_keys[a])
    for b, c in g.composable_pairs():
        bc = g.comp[(b, c)]
        for a in g.arrows_from(g.tgt[b]):
            report.checks += 1
            if g.comp[(a, bc)] != g.comp[(g.comp[(a, b)], c)]:
                report.add("associativity", g.arrow_keys[a], g.arrow_keys[b], g.arrow_keys[c])
    return report


def check_strict_hom(phi: StrictHom) -> ValidationReport:
    """Check that phi commutes with source, target, unit, inverse and composition."""
    g, h = phi.domain, phi.codomain
    report = ValidationReport(subject=phi.name)
    if len(phi.on_objects) != g.n_objects or len(phi.on_arrows) != g.n_arrows:
        report.add_structural("map length", len(phi.on_objects), len(phi.on_arrows))
        return report
    if any(not 0 <= y < h.n_objects for y in phi.on_objects) or \
            any(not 0 <= b < h.n_arrows for b in phi.on_arrows):
        report.add_structural("dangling image")
        return report
    for x in g.objects:
        report.checks += 1
        if phi(g.unit[x]) != h.unit[phi.obj(x)]:
            report.add("unit", g.object_keys[x])
    for a in g.arrows:
        report.checks += 1
        b = phi(a)
        if h.src[b] != phi.obj(g.src[a]):
            report.add("source", g.arrow_keys[a])
        if h.tgt[b] != phi.obj(g.tgt[a]):
            report.add("target", g.arrow_keys[a])
        if phi(g.inv[a]) != h.inv[b]:
            report.add("inverse", g.arrow_keys[a])
    if report.violations:
        return report
    for (a, b), c in g.comp.items():
        report.checks += 1
        if phi(c) != h.mul(phi(a), phi(b)):
            report.add("composition", g.arrow_keys[a], g.arrow_keys[b])
    return report


def is_strict_iso(phi: StrictHom) -> bool:
    return (check_strict_hom(phi).ok
            and sorted(phi.on_objects) == list(phi.codomain.objects)
            and sorted(phi.on_arrows) == list(phi.codomain.arrows))


def identity_hom(g: FiniteGroupoid) -> StrictHom:
    return StrictHom(g, g, tuple(g.objects), tuple(g.arrows), "id")


def compose_homs(first: StrictHom, second: StrictHom) -> StrictHom:
    """second ∘ first."""
    if first.codomain is not second.domain:
        raise StructureError(f"cannot compose {first.name} with {second.name}: groupoid mismatch")
    return StrictHom(first.domain, second.codomain,
                     tuple(second.obj(y) for y in first.on_objects),
                     tuple(second(b) for b in first.on_arrows),
                     f"{second.name}.{first.name}")


def invert_strict_iso(phi: StrictHom) -> StrictHom:
    if not is_strict_iso(phi):
        raise StructureError(f"{phi.name} is not a strict isomorphism")
    objs = [0] * phi.codomain.n_objects
    arrs = [0] * phi.codomain.n_arrows
    for x, y in enumerate(phi.on_objects):
        objs[y] = x
    for a, b in enumerate(phi.on_arrows):
        arrs[b] = a
    return StrictHom(phi.codomain, phi.domain, tuple(objs), tuple(arrs), f"{phi.name}^-1")


def hom_from_keys(domain: FiniteGroupoid, codomain: FiniteGroupoid,
                  on_objects: Callable[[Hashable], Hashable], on_arrows: Callable[[Hashable], Hashable],
                  name: str = "phi") -> StrictHom:
    """Build a StrictHom from maps on keys."""
    return StrictHom(domain, codomain,
                     tuple(codomain.object_id(on_objects(k)) for k in domain.object_keys),
                     tuple(codomain.arrow_id(on_arrows(k)) for k in domain.arrow_keys),
                     name)


def strictly_equal(g: FiniteGroupoid, h: FiniteGroupoid) -> bool:
    """Identical tables (keys and names ignored)."""
    return (g.n_objects == h.n_objects and g.src == h.src and g.tgt == h.tgt
            and g.unit == h.unit and g.inv == h.inv and dict(g.comp) == dict(h.comp))


# ---------------------------------------------------------------------------
# Coarse quotient and stabilizers
# ---------------------------------------------------------------------------

def coarse_quotient(g: FiniteGroupoid) -> CoarseQuotient:
    """Partition objects by 'there is an arrow between them'."""
    uf = UnionFind(g.objects)
    for a in g.arrows:
        uf.union(g.src[a], g.tgt[a])
    classes = tuple(tuple(c) for c in uf.classes(list(g.objects)))
    class_of = [0] * g.n_objects
    for i, c in enumerate(classes):
        for x in c:
            class_of[x] = i
    return CoarseQuotient(classes, tuple(class_of))


def stabilizer(g: FiniteGroupoid, x: int) -> FiniteGroup:
    """S_x under composition; element labels are arrow ids of G."""
    arrows = g.isotropy(x)
    pos = {a: i for i, a in enumerate(arrows)}
    table = [[pos[g.mul(a, b)] for b in arrows] for a in arrows]
    return FiniteGroup(table, arrows, f"S({g.object_label(x)})")


def conjugate(g: FiniteGroupoid, h: int, by: int) -> int:
    """h·by = by⁻¹ h by, for an isotropy arrow h at t(by)."""
    return g.mul_all(g.inv[by], h, by)


def isotropy_arrows(g: FiniteGroupoid) -> Tuple[int, ...]:
    return tuple(a for a in g.arrows if g.src[a] == g.tgt[a])
