"""Finite groups as Cayley tables.

Elements are dense indices ``0..n-1``; ``labels[i]`` is the user-facing name of
element ``i`` (a permutation tuple, an arrow id, a pair for products...).
Products of groups use lexicographic pairing of indices.
"""
from functools import cached_property
from itertools import permutations
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config import get_config
from src.errors import Refusal, StructureError
from src.reports import ValidationReport

Perm = Tuple[int, ...]


def compose_perm(p: Perm, q: Perm) -> Perm:
    """Return p ∘ q (apply q first)."""
    return tuple(p[i] for i in q)


def invert_perm(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


class FiniteGroup:
    """
    A finite group given by its multiplication table.

    Args:
        table: n x n array with table[a, b] = index of a*b
        labels: optional names for the n elements (default 0..n-1)
        name: display name
    """

    def __init__(self, table, labels: Optional[Sequence[Hashable]] = None, name: str = "group"):
        table = np.array(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise StructureError(f"{name}: multiplication table must be a non-empty square array")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise StructureError(f"{name}: multiplication table references an unknown element")
        table.setflags(write=False)
        self.table = table
        self.labels: Tuple[Hashable, ...] = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise StructureError(f"{name}: {len(self.labels)} labels for {n} elements")
        self.name = name
        self._index = {label: i for i, label in enumerate(self.labels)}
        if len(self._index) != n:
            raise StructureError(f"{name}: duplicate element labels")

        rows = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(table[e], rows) and np.array_equal(table[:, e], rows)]
        if not ids:
            raise StructureError(f"{name}: no identity element")
        self.identity = ids[0]
        inverses = []
        for a in range(n):
            hits = np.nonzero(table[a] == self.identity)[0]
            if len(hits) == 0:
                raise StructureError(f"{name}: element {self.labels[a]!r} has no inverse")
            inverses.append(int(hits[0]))
        self._inverse = tuple(inverses)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise StructureError(f"{self.name}: unknown element {label!r}") from None

    def label(self, a: int) -> Hashable:
        return self.labels[a]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        out = self.identity
        for _ in range(k):
            out = self.mul(out, a)
        return out

    def conj(self, h: int, g: int) -> int:
        """Right conjugation h·g = g⁻¹ h g."""
        return self.mul(self.mul(self.inv(g), h), g)

    @cached_property
    def element_orders(self) -> Tuple[int, ...]:
        orders = []
        for a in self.elements:
            k, x = 1, a
            while x != self.identity:
                x = self.mul(x, a)
                k += 1
            orders.append(k)
        return tuple(orders)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    @cached_property
    def center(self) -> Tuple[int, ...]:
        commutes = np.all(self.table == self.table.T, axis=1)
        return tuple(int(a) for a in np.nonzero(commutes)[0])

    def generated(self, gens: Sequence[int]) -> frozenset:
        """Subgroup generated by `gens`, as a set of element indices."""
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            x = frontier.pop()
            for s in gens:
                y = self.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return frozenset(seen)

    @cached_property
    def generators(self) -> Tuple[int, ...]:
        """Greedy generating set, preferring elements of large order."""
        gens: List[int] = []
        span = frozenset({self.identity})
        for a in sorted(self.elements, key=lambda a: (-self.element_orders[a], a)):
            if a not in span:
                gens.append(a)
                span = self.generated(gens)
            if len(span) == self.order:
                break
        return tuple(gens)

    def subgroup(self, members: Sequence[int], name: Optional[str] = None) -> "FiniteGroup":
        """The subgroup on `members`; its labels are the labels of this group."""
        members = sorted(members)
        pos = {a: i for i, a in enumerate(members)}
        try:
            table = [[pos[self.mul(a, b)] for b in members] for a in members]
        except KeyError:
            raise StructureError(f"{self.name}: subset is not closed under multiplication") from None
        return FiniteGroup(table, [self.labels[a] for a in members], name or f"sub({self.name})")

    def is_normal(self, members: Sequence[int]) -> bool:
        members = set(members)
        return all(self.conj(h, g) in members for h in members for g in self.elements)


def validate_group(group: FiniteGroup) -> ValidationReport:
    """Check associativity (identity and inverses are checked at construction)."""
    report = ValidationReport(subject=group.name)
    t = group.table
    n = group.order
    idx = np.arange(n)
    left = t[t[:, :, None], idx[None, None, :]]
    right = t[idx[:, None, None], t[None, :, :]]
    bad = np.argwhere(left != right)
    for a, b, c in bad[:5]:
        report.add("associativity", group.label(int(a)), group.label(int(b)), group.label(int(c)))
    report.checks = n ** 3
    return report


def group_from_operation(labels: Sequence[Hashable], mul: Callable[[Hashable, Hashable], Hashable],
                         name: str = "group") -> FiniteGroup:
    """Tabulate a group given element labels and a multiplication on labels."""
    labels = list(labels)
    if len(labels) > get_config().max_size:
        raise Refusal(f"{name}: group of order {len(labels)} exceeds size limit")
    pos = {label: i for i, label in enumerate(labels)}
    try:
        table = [[pos[mul(a, b)] for b in labels] for a in labels]
    except KeyError as exc:
        raise StructureError(f"{name}: product {exc.args[0]!r} is not an element") from None
    return FiniteGroup(table, labels, name)


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], [0], "1")


def cyclic_group(n: int) -> FiniteGroup:
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n, range(n), f"Z{n}")


def symmetric_group(n: int) -> FiniteGroup:
    """Sym(n) on {0..n-1}: permutations in lexicographic order, product = composition."""
    perms = list(permutations(range(n)))
    return group_from_operation(perms, compose_perm, f"Sym({n})")


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon as permutations of its vertices."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return permutation_group([rot, ref], n, f"D{n}")


def permutation_group(generators: Sequence[Perm], degree: int, name: str = "perm") -> FiniteGroup:
    """Closure of permutation generators, elements sorted lexicographically."""
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    while frontier:
        x = frontier.pop()
        for s in generators:
            y = compose_perm(x, tuple(s))
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return group_from_operation(sorted(seen), compose_perm, name)


def direct_product(g: FiniteGroup, h: FiniteGroup, name: Optional[str] = None) -> FiniteGroup:
    """G x H with element (a, b) at index a*|H| + b; labels are label pairs."""
    m = h.order
    a = np.arange(g.order)
    b = np.arange(m)
    ga = g.table[a[:, None, None, None], a[None, None, :, None]]
    hb = h.table[b[None, :, None, None], b[None, None, None, :]]
    table = (ga * m + hb).reshape(g.order * m, g.order * m)
    labels = [(x, y) for x in g.labels for y in h.labels]
    return FiniteGroup(table, labels, name or f"{g.name}x{h.name}")


def pair_index(h: FiniteGroup, a: int, b: int) -> int:
    """Index of (a, b) in direct_product(g, h)."""
    return a * h.order + b


def split_index(h: FiniteGroup, ab: int) -> Tuple[int, int]:
    return divmod(ab, h.order)


def is_homomorphism(g: FiniteGroup, h: FiniteGroup, images: Sequence[int]) -> bool:
    f = np.asarray(images, dtype=np.int64)
    if f.shape != (g.order,):
        return False
    return bool(np.array_equal(f[g.table], h.table[f[:, None], f[None, :]]))


def _invariants(g: FiniteGroup):
    return g.order, g.is_abelian, tuple(sorted(g.element_orders)), len(g.center)


def isomorphisms(g: FiniteGroup, h: FiniteGroup) -> Iterator[Tuple[int, ...]]:
    """
    Enumerate all isomorphisms g -> h as image tuples, in lexicographic order
    of generator images.

    Backtracks over images of a greedy generating set; each partial assignment
    is extended along the Cayley graph and rejected on the first inconsistency.
    """
    if _invariants(g) != _invariants(h):
        return
    limit = get_config().max_group_order
    if g.order > limit:
        raise Refusal(f"isomorphism search limited to order {limit}", witness=(g.name, g.order))
    gens = g.generators
    candidates = [[y for y in h.elements if h.element_orders[y] == g.element_orders[s]] for s in gens]

    def extend(images: List[int]) -> Optional[Dict[int, int]]:
        mapping = {g.identity: h.identity}
        used = {h.identity}
        frontier = [g.identity]
        pairs = list(zip(gens, images))
        while frontier:
            x = frontier.pop()
            fx = mapping[x]
            for s, fs in pairs:
                y = g.mul(x, s)
                fy = h.mul(fx, fs)
                if y in mapping:
                    if mapping[y] != fy:
                        return None
                elif fy in used:
                    return None
                else:
                    mapping[y] = fy
                    used.add(fy)
                    frontier.append(y)
        return mapping

    def search(images: List[int]) -> Iterator[Tuple[int, ...]]:
        mapping = extend(images)
        if mapping is None:
            return
        if len(images) == len(gens):
            yield tuple(mapping[x] for x in g.elements)
            return
        for y in candidates[len(images)]:
            yield from search(images + [y])

    yield from search([])


def find_isomorphism(g: FiniteGroup, h: FiniteGroup) -> Optional[Tuple[int, ...]]:
    return next(isomorphisms(g, h), None)


def are_isomorphic(g: FiniteGroup, h: FiniteGroup) -> bool:
    return find_isomorphism(g, h) is not None


def automorphism_group(g: FiniteGroup) -> FiniteGroup:
    """Aut(g): automorphisms as image tuples, sorted; product = composition."""
    autos = sorted(isomorphisms(g, g))
    return group_from_operation(autos, compose_perm, f"Aut({g.name})")
