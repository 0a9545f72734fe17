"""
Hilsum-Skandalis bibundles between finite groupoids.

A bibundle P: G -> H is a set with a left G-action over s_P: P -> G₀ and a
right H-action over t_P: P -> H₀, compatible, with the H-action principal
over s_P. Both actions are stored as `GroupoidAction` tables keyed by
(point, arrow).
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.actions import LEFT, RIGHT, GroupAction, GroupoidAction, groupoid_action, validate_groupoid_action
from src.config import get_config
from src.errors import Refusal, StructureError
from src.groupoid import (
    FiniteGroupoid,
    StrictHom,
    UnionFind,
    check_strict_hom,
    coarse_quotient,
    stabilizer,
)
from src.groups import FiniteGroup, find_isomorphism, is_homomorphism
from src.reports import Certificate, ValidationReport


@dataclass(frozen=True, eq=False)
class Bibundle:
    left: GroupoidAction
    right: GroupoidAction
    name: str = "P"

    def __repr__(self) -> str:
        return f"Bibundle({self.name}: {self.source.name} -> {self.target.name}, |P|={len(self)})"

    def __len__(self) -> int:
        return len(self.left.carrier)

    @property
    def source(self) -> FiniteGroupoid:
        return self.left.groupoid

    @property
    def target(self) -> FiniteGroupoid:
        return self.right.groupoid

    @property
    def total(self) -> Tuple[Hashable, ...]:
        return self.left.carrier

    @property
    def s_p(self) -> Tuple[int, ...]:
        return self.left.base

    @property
    def t_p(self) -> Tuple[int, ...]:
        return self.right.base

    def lact(self, g: int, p: int) -> int:
        """g·p"""
        return self.left.act(p, g)

    def ract(self, p: int, h: int) -> int:
        """p·h"""
        return self.right.act(p, h)

    def points(self) -> range:
        return range(len(self))


def make_bibundle(source: FiniteGroupoid, target: FiniteGroupoid, total: Sequence[Hashable],
                  s_p: Sequence[int], t_p: Sequence[int], lact, ract, name: str = "P") -> Bibundle:
    """Tabulate lact(g, p) and ract(p, h) wherever defined."""
    total = tuple(total)
    left = groupoid_action(source, total, s_p, lambda p, g: lact(g, p), side=LEFT, name=f"{name} left")
    right = groupoid_action(target, total, t_p, ract, side=RIGHT, name=f"{name} right")
    return Bibundle(left, right, name)


# ---------------------------------------------------------------------------
# Validation and principality
# ---------------------------------------------------------------------------

def _principal_witness(act: GroupoidAction, fiber_map: Sequence[int], base: FiniteGroupoid) -> Optional[tuple]:
    """
    None when `act` is free, transitive on the fibers of `fiber_map`, and
    fiber_map is surjective; otherwise a witness naming the failure.
    """
    g = act.groupoid
    hit = set(fiber_map)
    for x in base.objects:
        if x not in hit:
            return ("not surjective", base.object_label(x))
    fibers: Dict[int, List[int]] = {}
    for p, x in enumerate(fiber_map):
        fibers.setdefault(x, []).append(p)
    for x, members in fibers.items():
        p = members[0]
        reached: Dict[int, int] = {}
        for a in act.acting_arrows(p):
            q = act.act(p, a)
            if q in reached:
                return ("not free", act.carrier[p], g.arrow_label(reached[q]), g.arrow_label(a))
            reached[q] = a
        for q in members:
            if q not in reached:
                return ("not transitive", act.carrier[p], act.carrier[q])
    return None


def right_principality_witness(p: Bibundle) -> Optional[tuple]:
    """H-action principal over s_P."""
    return _principal_witness(p.right, p.s_p, p.source)


def left_principality_witness(p: Bibundle) -> Optional[tuple]:
    """G-action principal over t_P."""
    return _principal_witness(p.left, p.t_p, p.target)


def validate_bibundle(p: Bibundle) -> ValidationReport:
    """Both actions, leg invariance, compatibility and right principality."""
    report = ValidationReport(subject=p.name)
    if p.left.carrier != p.right.carrier:
        report.add_structural("actions on different sets")
        return report
    report.merge(validate_groupoid_action(p.left), prefix="left ")
    report.merge(validate_groupoid_action(p.right), prefix="right ")
    if not report.ok:
        return report
    g, h = p.source, p.target
    for q in p.points():
        for b in p.right.acting_arrows(q):
            report.checks += 1
            if p.s_p[p.ract(q, b)] != p.s_p[q]:
                report.add("s_P not H-invariant", p.total[q], h.arrow_label(b))
        for a in p.left.acting_arrows(q):
            report.checks += 1
            if p.t_p[p.lact(a, q)] != p.t_p[q]:
                report.add("t_P not G-invariant", p.total[q], g.arrow_label(a))
    if report.violations:
        return report
    for q in p.points():
        for a in p.left.acting_arrows(q):
            for b in p.right.acting_arrows(q):
                report.checks += 1
                if p.ract(p.lact(a, q), b) != p.lact(a, p.ract(q, b)):
                    report.add("actions not compatible", p.total[q], g.arrow_label(a), h.arrow_label(b))
    witness = right_principality_witness(p)
    report.checks += len(p)
    if witness is not None:
        report.add("right action not principal", *witness)
    return report


def principality_by_bijection(p: Bibundle) -> bool:
    """(q, h) ↦ (q, q·h) is a bijection P ×_{H₀} H₁ -> P ×_{G₀} P, and s_P is onto."""
    if set(p.s_p) != set(p.source.objects):
        return False
    image = set()
    count = 0
    for q in p.points():
        for h in p.right.acting_arrows(q):
            image.add((q, p.ract(q, h)))
            count += 1
    pairs = {(q, r) for q in p.points() for r in p.points() if p.s_p[q] == p.s_p[r]}
    return count == len(image) and image == pairs


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def identity_bibundle(g: FiniteGroupoid) -> Bibundle:
    """P = G₁ with s_P = t, t_P = s, both actions by composition."""
    return make_bibundle(g, g, g.arrow_keys, g.tgt, g.src,
                         lambda a, q: g.mul(a, q), lambda q, b: g.mul(q, b), f"id({g.name})")


def from_strict_hom(phi: StrictHom) -> Bibundle:
    """P = G₀ ×_{H₀} H₁ = {(x, h) | φ(x) = t(h)}, with g·(x, h)·h' = (t(g), φ(g) h h')."""
    g, h = phi.domain, phi.codomain
    pairs = [(x, b) for x in g.objects for b in h.arrows_into(phi.obj(x))]
    pos = {xb: i for i, xb in enumerate(pairs)}
    return make_bibundle(
        g, h, [(g.object_keys[x], h.arrow_keys[b]) for x, b in pairs],
        [x for x, _ in pairs], [h.src[b] for _, b in pairs],
        lambda a, q: pos[(g.tgt[a], h.mul(phi(a), pairs[q][1]))],
        lambda q, c: pos[(pairs[q][0], h.mul(pairs[q][1], c))],
        f"<{phi.name}>",
    )


def compose(p: Bibundle, q: Bibundle) -> Bibundle:
    """
    P ∘ Q = (P ×_{H₀} Q)/H for P: G -> H and Q: H -> K, where h acts by
    (p, q)·h = (p·h, h⁻¹·q). Each orbit is represented by its least pair.
    """
    if p.target is not q.source:
        raise StructureError(f"cannot compose {p.name} with {q.name}: groupoid mismatch")
    h = p.target
    pairs = [(a, b) for a in p.points() for b in q.points() if p.t_p[a] == q.s_p[b]]
    uf = UnionFind(pairs)
    for a, b in pairs:
        for c in p.right.acting_arrows(a):
            uf.union((a, b), (p.ract(a, c), q.lact(h.inv[c], b)))
    orbits = uf.classes(pairs)
    reps = [orbit[0] for orbit in orbits]
    orbit_of = {pair: i for i, orbit in enumerate(orbits) for pair in orbit}
    return make_bibundle(
        p.source, q.target, [(p.total[a], q.total[b]) for a, b in reps],
        [p.s_p[a] for a, _ in reps], [q.t_p[b] for _, b in reps],
        lambda g, i: orbit_of[(p.lact(g, reps[i][0]), reps[i][1])],
        lambda i, k: orbit_of[(reps[i][0], q.ract(reps[i][1], k))],
        f"{p.name}.{q.name}",
    )


def opposite_bibundle(p: Bibundle) -> Bibundle:
    """P read backwards: H acts on the left by h·q = q·h⁻¹, G on the right by q·g = g⁻¹·q."""
    g, h = p.source, p.target
    return make_bibundle(h, g, p.total, p.t_p, p.s_p,
                         lambda b, q: p.ract(q, h.inv[b]),
                         lambda q, a: p.lact(g.inv[a], q),
                         f"{p.name}^op")


# ---------------------------------------------------------------------------
# 2-isomorphisms
# ---------------------------------------------------------------------------

def check_two_iso(p: Bibundle, q: Bibundle, alpha: Sequence[int]) -> ValidationReport:
    report = ValidationReport(subject=f"{p.name} => {q.name}")
    if p.source is not q.source or p.target is not q.target:
        report.add_structural("endpoint mismatch")
        return report
    if len(alpha) != len(p) or sorted(alpha) != list(q.points()):
        report.add("not a bijection")
        return report
    for x in p.points():
        report.checks += 1
        y = alpha[x]
        if q.s_p[y] != p.s_p[x] or q.t_p[y] != p.t_p[x]:
            report.add("legs", p.total[x])
        for a in p.left.acting_arrows(x):
            if alpha[p.lact(a, x)] != q.lact(a, y):
                report.add("left equivariance", p.total[x], p.source.arrow_label(a))
        for b in p.right.acting_arrows(x):
            if alpha[p.ract(x, b)] != q.ract(y, b):
                report.add("right equivariance", p.total[x], p.target.arrow_label(b))
    return report


def _orbit_reps(p: Bibundle) -> List[int]:
    uf = UnionFind(p.points())
    for x in p.points():
        for a in p.left.acting_arrows(x):
            uf.union(x, p.lact(a, x))
        for b in p.right.acting_arrows(x):
            uf.union(x, p.ract(x, b))
    return [c[0] for c in uf.classes(list(p.points()))]


def enumerate_two_isos(p: Bibundle, q: Bibundle) -> Iterator[Tuple[int, ...]]:
    """
    All G×H-equivariant bijections P -> Q over the legs, in id order.

    An equivariant map is fixed on a G×H-orbit by the image of its least
    point; candidates are matched by legs and propagated along both actions.
    """
    if p.source is not q.source or p.target is not q.target:
        raise StructureError("2-isomorphisms need bibundles with the same endpoints")
    if len(p) != len(q):
        return
    limit = get_config().two_iso_node_limit
    reps = _orbit_reps(p)
    nodes = [0]

    def propagate(alpha: Dict[int, int], used: set, start: int, image: int) -> Optional[List[int]]:
        added = []
        alpha[start] = image
        used.add(image)
        added.append(start)
        todo = deque([start])
        while todo:
            x = todo.popleft()
            y = alpha[x]
            moves = [(p.lact(a, x), q.lact(a, y)) for a in p.left.acting_arrows(x)]
            moves += [(p.ract(x, b), q.ract(y, b)) for b in p.right.acting_arrows(x)]
            for x2, y2 in moves:
                if x2 in alpha:
                    if alpha[x2] != y2:
                        return _undo(alpha, used, added)
                elif y2 in used or q.s_p[y2] != p.s_p[x2] or q.t_p[y2] != p.t_p[x2]:
                    return _undo(alpha, used, added)
                else:
                    alpha[x2] = y2
                    used.add(y2)
                    added.append(x2)
                    todo.append(x2)
        return added

    def search(i: int, alpha: Dict[int, int], used: set) -> Iterator[Tuple[int, ...]]:
        if i == len(reps):
            yield tuple(alpha[x] for x in p.points())
            return
        r = reps[i]
        for y in q.points():
            if y in used or q.s_p[y] != p.s_p[r] or q.t_p[y] != p.t_p[r]:
                continue
            nodes[0] += 1
            if nodes[0] > limit:
                raise Refusal("2-isomorphism search exceeded node limit", witness=limit)
            added = propagate(alpha, used, r, y)
            if added is None:
                continue
            yield from search(i + 1, alpha, used)
            _undo(alpha, used, added)

    yield from search(0, {}, set())


def _undo(alpha: Dict[int, int], used: set, added: List[int]) -> None:
    for x in added:
        used.discard(alpha.pop(x))
    return None


def find_two_iso(p: Bibundle, q: Bibundle) -> Optional[Tuple[int, ...]]:
    return next(enumerate_two_isos(p, q), None)


# ---------------------------------------------------------------------------
# Equivalences
# ---------------------------------------------------------------------------

def is_equivalence(p: Bibundle) -> Certificate:
    """Principal on both sides."""
    right = right_principality_witness(p)
    left = left_principality_witness(p)
    witnesses = [("right", *right)] if right else []
    if left:
        witnesses.append(("left", *left))
    return Certificate(claim=f"{p.name} is an equivalence", verified=not witnesses,
                       checks=2 * len(p), witnesses=witnesses,
                       detail={"right_principal": right is None, "left_principal": left is None})


def is_essential_equivalence(phi: StrictHom) -> Certificate:
    """
    (a) every object of H receives an arrow from some φ(x);
    (b) G₁ -> {(x, y, h) | h: φ(x) -> φ(y)} is a bijection.
    """
    g, h = phi.domain, phi.codomain
    witnesses = []
    reached = {h.src[b] for x in g.objects for b in h.arrows_into(phi.obj(x))}
    missing = [y for y in h.objects if y not in reached]
    if missing:
        witnesses.append(("not essentially surjective", h.object_label(missing[0])))
    checks = h.n_objects
    pullback = 0
    for x in g.objects:
        for y in g.objects:
            arrows = g.hom(x, y)
            images = {phi(a) for a in arrows}
            target = h.hom(phi.obj(x), phi.obj(y))
            pullback += len(target)
            checks += len(target)
            if len(images) != len(arrows) or len(target) != len(images):
                witnesses.append(("not fully faithful", g.object_label(x), g.object_label(y),
                                  len(arrows), len(target)))
    return Certificate(claim=f"{phi.name} is an essential equivalence", verified=not witnesses,
                       checks=checks, witnesses=witnesses[:10],
                       detail={"essentially_surjective": not missing,
                               "fully_faithful": not any(w[0] == "not fully faithful" for w in witnesses),
                               "arrows": g.n_arrows, "pullback": pullback})


# ---------------------------------------------------------------------------
# Induced invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoarseMap:
    mapping: Tuple[int, ...]
    well_defined: bool
    witness: Optional[tuple] = None

    @property
    def is_bijection(self) -> bool:
        return self.well_defined and len(set(self.mapping)) == len(self.mapping)


def induced_coarse_map(p: Bibundle) -> CoarseMap:
    """f_P([s_P(q)]) = [t_P(q)], with a well-definedness check over all of P."""
    cg, ch = coarse_quotient(p.source), coarse_quotient(p.target)
    mapping: Dict[int, int] = {}
    witness = None
    for q in p.points():
        c, d = cg.class_of[p.s_p[q]], ch.class_of[p.t_p[q]]
        if mapping.setdefault(c, d) != d and witness is None:
            witness = (p.total[q], c, mapping[c], d)
    if len(mapping) != len(cg):
        raise AssertionError(f"{p.name}: s_P misses a coarse class")
    return CoarseMap(tuple(mapping[c] for c in range(len(cg))), witness is None, witness)


@dataclass(frozen=True, eq=False)
class StabilizerHom:
    """ψ: S_x -> S_y as group-index images, normalized within its conjugacy class."""
    source: FiniteGroup
    target: FiniteGroup
    images: Tuple[int, ...]
    raw_images: Tuple[int, ...]

    @property
    def is_homomorphism(self) -> bool:
        return is_homomorphism(self.source, self.target, self.images)

    @property
    def is_isomorphism(self) -> bool:
        return self.is_homomorphism and len(set(self.images)) == self.target.order == self.source.order

    def arrow_images(self) -> Dict[int, int]:
        return {self.source.label(i): self.target.label(j) for i, j in enumerate(self.images)}


def induced_stabilizer_hom(p: Bibundle, x: int, y: int) -> StabilizerHom:
    """
    ψ(g) = h₀ h h₀⁻¹ where g·q = q·h for the least q over x and h₀ is the
    least arrow t_P(q) -> y. The result is replaced by its lexicographically
    least conjugate under S_y.
    """
    g, h = p.source, p.target
    over = [q for q in p.points() if p.s_p[q] == x]
    assert over, f"{p.name}: no point over {x}"
    q = over[0]
    links = h.hom(p.t_p[q], y)
    if not links:
        raise Refusal("target object is not in the image class", witness=(g.object_label(x), h.object_label(y)))
    h0 = links[0]
    s_x, s_y = stabilizer(g, x), stabilizer(h, y)
    right = {p.ract(q, b): b for b in p.right.acting_arrows(q)}
    raw = []
    for a in s_x.labels:
        b = right.get(p.lact(a, q))
        if b is None:
            raise Refusal("right action not transitive on the fiber", witness=(p.total[q], g.arrow_label(a)))
        raw.append(s_y.index(h.mul_all(h0, b, h.inv[h0])))
    best = min(tuple(s_y.mul(s_y.mul(c, r), s_y.inv(c)) for r in raw) for c in s_y.elements)
    return StabilizerHom(s_x, s_y, best, tuple(raw))


# ---------------------------------------------------------------------------
# Translation groupoids
# ---------------------------------------------------------------------------

def translation_bibundle(x_action: GroupAction, y_action: GroupAction, x_grpd: FiniteGroupoid,
                         y_grpd: FiniteGroupoid, total: Sequence[Hashable], s_p: Sequence[int],
                         t_p: Sequence[int], k_on_p: GroupAction, l_on_p: GroupAction,
                         name: str = "P") -> Bibundle:
    """
    The bibundle X⋊K -> Y⋊L of a K-equivariant principal L-bundle s_P: P -> X.

    Args:
        x_action, y_action: the right actions defining X⋊K and Y⋊L
        x_grpd, y_grpd: translation_groupoid of those actions
        k_on_p: left K-action on P with s_P(k·p) = s_P(p)·k⁻¹ and t_P(k·p) = t_P(p)
        l_on_p: right L-action on P with s_P(p·l) = s_P(p) and t_P(p·l) = t_P(p)·l

    Raises:
        Refusal: an equivariance condition fails (witness names the point), or
            L is not free and transitive on the fibres of s_P
    """
    k, l = x_action.group, y_action.group
    if k_on_p.side != LEFT or l_on_p.side != RIGHT:
        raise StructureError("K must act on the left and L on the right")
    for p in range(len(total)):
        for a in k.elements:
            kp = k_on_p.act(p, a)
            if s_p[kp] != x_action.act(s_p[p], k.inv(a)) or t_p[kp] != t_p[p]:
                raise Refusal("K-action not equivariant", witness=(total[p], k.label(a)))
            for b in l.elements:
                if l_on_p.act(kp, b) != k_on_p.act(l_on_p.act(p, b), a):
                    raise Refusal("K- and L-actions do not commute", witness=(total[p], k.label(a), l.label(b)))
        for b in l.elements:
            pl = l_on_p.act(p, b)
            if s_p[pl] != s_p[p] or t_p[pl] != y_action.act(t_p[p], b):
                raise Refusal("L-action not equivariant", witness=(total[p], l.label(b)))
    m, n = k.order, l.order
    # arrow (x, k) of X⋊K has id x*|K| + k; acting on p it gives k·p
    bundle = make_bibundle(x_grpd, y_grpd, total, s_p, t_p,
                           lambda a, p: k_on_p.act(p, a % m),
                           lambda p, b: l_on_p.act(p, b % n), name)
    witness = right_principality_witness(bundle)
    if witness is not None:
        raise Refusal(f"L-action not principal on the fibres of s_P: {witness[0]}", witness=witness)
    return bundle


def extract_translation_data(p: Bibundle, x_action: GroupAction,
                             y_action: GroupAction) -> Tuple[GroupAction, GroupAction]:
    """Recover k·q = (s_P(q)·k⁻¹, k)·q and q·l = q·(t_P(q), l)."""
    k, l = x_action.group, y_action.group
    k_on_p = GroupAction(k, p.total, _table([[p.lact(x_action.act(p.s_p[q], k.inv(a)) * k.order + a, q)
                                               for a in k.elements] for q in p.points()]), LEFT, "K on P")
    l_on_p = GroupAction(l, p.total, _table([[p.ract(q, p.t_p[q] * l.order + b)
                                               for b in l.elements] for q in p.points()]), RIGHT, "L on P")
    return k_on_p, l_on_p


def _table(rows):
    table = np.array(rows, dtype=np.int64)
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Weak equivalence
# ---------------------------------------------------------------------------

class ClassInvariant(BaseModel):
    representative: str
    size: int
    stabilizer_order: int
    stabilizer_abelian: bool


class WeakEquivalenceReport(BaseModel):
    left: str
    right: str
    equivalent: bool
    reason: str
    left_classes: List[ClassInvariant] = Field(default_factory=list)
    right_classes: List[ClassInvariant] = Field(default_factory=list)
    matching: List[int] = Field(default_factory=list)


@dataclass(frozen=True, eq=False)
class WeakEquivalence:
    report: WeakEquivalenceReport
    bibundle: Optional[Bibundle] = None

    @property
    def equivalent(self) -> bool:
        return self.report.equivalent


def _class_invariants(g: FiniteGroupoid):
    cq = coarse_quotient(g)
    stabs = [stabilizer(g, c[0]) for c in cq.classes]
    rows = [ClassInvariant(representative=g.object_label(c[0]), size=len(c),
                           stabilizer_order=s.order, stabilizer_abelian=s.is_abelian)
            for c, s in zip(cq.classes, stabs)]
    return cq, stabs, rows


def decide_weak_equivalence(g: FiniteGroupoid, h: FiniteGroupoid, construct: bool = True) -> WeakEquivalence:
    """
    Match coarse classes of G and H by stabilizer isomorphism type.

    When they match and `construct` is set, also build an explicit
    equivalence bibundle from chosen basepoints.
    """
    cg, sg, rows_g = _class_invariants(g)
    ch, sh, rows_h = _class_invariants(h)
    report = WeakEquivalenceReport(left=g.name, right=h.name, equivalent=False, reason="",
                                   left_classes=rows_g, right_classes=rows_h)
    if len(cg) != len(ch):
        report.reason = f"coarse class counts differ ({len(cg)} vs {len(ch)})"
        return WeakEquivalence(report)
    matching: List[int] = []
    isos = []
    free = list(range(len(ch)))
    for i, s in enumerate(sg):
        for j in free:
            theta = find_isomorphism(s, sh[j])
            if theta is not None:
                matching.append(j)
                isos.append(theta)
                free.remove(j)
                break
        else:
            report.reason = "stabilizer types differ"
            return WeakEquivalence(report)
    report.equivalent = True
    report.reason = "classes matched with isomorphic stabilizers"
    report.matching = matching
    if not construct:
        return WeakEquivalence(report)
    return WeakEquivalence(report, basepoint_equivalence(g, h, matching, isos))


def basepoint_equivalence(g: FiniteGroupoid, h: FiniteGroupoid, matching: Sequence[int],
                          isos: Sequence[Sequence[int]]) -> Bibundle:
    """
    Equivalence bibundle from matched classes: for class c with basepoint a,
    matched basepoint b and θ: S_a ≅ S_b, P = {(x, h) | x in c, t(h) = b} with
    g'·(x, h) = (x', θ(g_{x'}⁻¹ g' g_x) h) and (x, h)·h' = (x, h h').
    """
    cg, ch = coarse_quotient(g), coarse_quotient(h)
    base_b, theta, chooser = {}, {}, {}
    for c, cls in enumerate(cg.classes):
        a = cls[0]
        b = ch.classes[matching[c]][0]
        s_a, s_b = stabilizer(g, a), stabilizer(h, b)
        amap = {s_a.label(i): s_b.label(j) for i, j in enumerate(isos[c])}
        for x in cls:
            base_b[x] = b
            theta[x] = amap
            chooser[x] = g.hom(a, x)[0]
    pairs = [(x, c) for x in g.objects for c in h.arrows_into(base_b[x])]
    pos = {pair: i for i, pair in enumerate(pairs)}

    def lact(a, i):
        x, c = pairs[i]
        x2 = g.tgt[a]
        loop = g.mul_all(g.inv[chooser[x2]], a, chooser[x])
        return pos[(x2, h.mul(theta[x][loop], c))]

    return make_bibundle(g, h, [(g.object_keys[x], h.arrow_keys[c]) for x, c in pairs],
                         [x for x, _ in pairs], [h.src[c] for _, c in pairs],
                         lact, lambda i, d: pos[(pairs[i][0], h.mul(pairs[i][1], d))],
                         f"E({g.name},{h.name})")


def search_equivalence_functor(g: FiniteGroupoid, h: FiniteGroupoid) -> Optional[StrictHom]:
    """
    Brute-force search for an essential equivalence G -> H.

    Objects are assigned with hom-set sizes as the only pruning; arrows are
    assigned one at a time with images forced through composition.
    """
    hom_g = {(x, y): len(g.hom(x, y)) for x in g.objects for y in g.objects}
    hom_h = {(x, y): len(h.hom(x, y)) for x in h.objects for y in h.objects}
    classes_h = coarse_quotient(h)

    def objects(i: int, omap: List[int]) -> Iterator[List[int]]:
        if i == g.n_objects:
            if {classes_h.class_of[y] for y in omap} == set(range(len(classes_h))):
                yield list(omap)
            return
        for y in h.objects:
            if hom_h[(y, y)] != hom_g[(i, i)]:
                continue
            if all(hom_h[(omap[j], y)] == hom_g[(j, i)] and hom_h[(y, omap[j])] == hom_g[(i, j)]
                   for j in range(i)):
                omap.append(y)
                yield from objects(i + 1, omap)
                omap.pop()

    for omap in objects(0, []):
        amap = _assign_arrows(g, h, omap)
        if amap is not None:
            phi = StrictHom(g, h, tuple(omap), tuple(amap), "oracle")
            if check_strict_hom(phi).ok and is_essential_equivalence(phi).verified:
                return phi
    return None


def _assign_arrows(g: FiniteGroupoid, h: FiniteGroupoid, omap: Sequence[int]) -> Optional[List[int]]:
    """An arrow map over `omap` that is a functor and injective on each hom-set, or None."""
    amap: List[Optional[int]] = [None] * g.n_arrows
    owner: Dict[Tuple[int, int, int], int] = {}

    def put(c: int, img: int) -> bool:
        key = (g.src[c], g.tgt[c], img)
        if owner.get(key, c) != c:
            return False
        amap[c] = img
        owner[key] = c
        return True

    def drop(cs: List[int]) -> None:
        for c in cs:
            owner.pop((g.src[c], g.tgt[c], amap[c]), None)
            amap[c] = None

    def close(start: List[int]) -> Optional[List[int]]:
        """Force images through composition and inverses; None (and nothing added) on conflict."""
        added: List[int] = []
        todo = deque(start)
        while todo:
            a = todo.popleft()
            forced = [(g.inv[a], h.inv[amap[a]])]
            forced += [(g.mul(b, a), h.mul(amap[b], amap[a])) for b in g.arrows_from(g.tgt[a]) if amap[b] is not None]
            forced += [(g.mul(a, b), h.mul(amap[a], amap[b])) for b in g.arrows_into(g.src[a]) if amap[b] is not None]
            for c, img in forced:
                if amap[c] is None:
                    if not put(c, img):
                        drop(added)
                        return None
                    added.append(c)
                    todo.append(c)
                elif amap[c] != img:
                    drop(added)
                    return None
        return added

    units = [g.unit[x] for x in g.objects]
    for x in g.objects:
        if not put(g.unit[x], h.unit[omap[x]]):
            return None
    if close(units) is None:
        return None

    def search(i: int) -> bool:
        while i < g.n_arrows and amap[i] is not None:
            i += 1
        if i == g.n_arrows:
            return True
        for b in h.hom(omap[g.src[i]], omap[g.tgt[i]]):
            if not put(i, b):
                continue
            added = close([i])
            if added is not None:
                if search(i + 1):
                    return True
                drop(added)
            drop([i])
        return False

    return list(amap) if search(0) else None
