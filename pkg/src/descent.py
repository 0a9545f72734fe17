"""
Descent for maps out of a finite set.

A map M -> G is a bibundle from M (viewed as a groupoid with only units) to
G. Covering M by parts U_α, a descent datum is a local map on each part plus
transition 2-isomorphisms on overlaps satisfying the cocycle condition.
Transitions are stored as dicts from point ids of ψ_α to point ids of ψ_β,
defined over U_αβ.
"""
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Dict, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from src.bibundle import (
    Bibundle,
    enumerate_two_isos,
    check_two_iso,
    find_two_iso,
    from_strict_hom,
    make_bibundle,
    validate_bibundle,
)
from src.config import get_config
from src.errors import Refusal, StructureError
from src.groupoid import FiniteGroupoid, StrictHom, UnionFind, b_group, trivial_groupoid
from src.groups import FiniteGroup, direct_product
from src.reports import ValidationReport, Violation

Transition = Mapping[int, int]


@dataclass(frozen=True, eq=False)
class Cover:
    """Parts U_α of a finite set M, each a sorted tuple of point ids."""
    points: Tuple[Hashable, ...]
    parts: Tuple[Tuple[int, ...], ...]
    name: str = "M"

    def __repr__(self) -> str:
        return f"Cover({self.name}, |M|={len(self.points)}, parts={len(self.parts)})"

    @cached_property
    def space(self) -> FiniteGroupoid:
        return trivial_groupoid(self.points, self.name)

    @cached_property
    def part_spaces(self) -> Tuple[FiniteGroupoid, ...]:
        return tuple(trivial_groupoid([self.points[u] for u in part], f"U{a}")
                     for a, part in enumerate(self.parts))

    @cached_property
    def _local_index(self) -> Tuple[Dict[int, int], ...]:
        return tuple({u: i for i, u in enumerate(part)} for part in self.parts)

    def local(self, a: int, u: int) -> int:
        """Object id of M-point u inside U_a."""
        return self._local_index[a][u]

    def overlap(self, *indices: int) -> Tuple[int, ...]:
        common = set(self.parts[indices[0]])
        for a in indices[1:]:
            common &= set(self.parts[a])
        return tuple(sorted(common))

    def containing(self, u: int) -> Tuple[int, ...]:
        return tuple(a for a, part in enumerate(self.parts) if u in self._local_index[a])


def make_cover(points: Sequence[Hashable], parts: Sequence[Sequence[int]], name: str = "M") -> Cover:
    """
    Raises:
        StructureError: a part is empty or names an unknown point, or the parts miss a point
    """
    points = tuple(points)
    if len(set(points)) != len(points):
        raise StructureError(f"{name}: repeated point")
    clean = []
    for a, part in enumerate(parts):
        part = tuple(sorted(set(part)))
        if not part:
            raise StructureError(f"{name}: part {a} is empty")
        if part[0] < 0 or part[-1] >= len(points):
            raise StructureError(f"{name}: part {a} names an unknown point")
        clean.append(part)
    missed = set(range(len(points))) - {u for part in clean for u in part}
    if missed:
        raise StructureError(f"{name}: parts do not cover {points[min(missed)]!r}")
    return Cover(points, tuple(clean), name)


def singleton_cover(points: Sequence[Hashable], name: str = "M") -> Cover:
    return make_cover(points, [[u] for u in range(len(points))], name)


# ---------------------------------------------------------------------------
# Descent data
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DescentDatum:
    cover: Cover
    target: FiniteGroupoid
    local: Tuple[Bibundle, ...]
    transitions: Mapping[Tuple[int, int], Transition]
    name: str = "D"

    def base_point(self, a: int, p: int) -> int:
        """M-point under point p of ψ_a."""
        return self.cover.parts[a][self.local[a].s_p[p]]

    def over(self, a: int, points: Sequence[int]) -> Tuple[int, ...]:
        """Points of ψ_a lying over the given M-points."""
        wanted = set(points)
        return tuple(p for p in self.local[a].points() if self.base_point(a, p) in wanted)

    def chi(self, a: int, b: int, p: int) -> int:
        return self.transitions[(a, b)][p]


def descent_datum(cover: Cover, target: FiniteGroupoid, local: Sequence[Bibundle],
                  transitions: Mapping[Tuple[int, int], Transition], name: str = "D") -> DescentDatum:
    """
    Assemble a datum, filling χ_αα = 1 and χ_βα = χ_αβ⁻¹ where those are
    not given.
    """
    local = tuple(local)
    full: Dict[Tuple[int, int], Dict[int, int]] = {k: dict(v) for k, v in transitions.items()}
    for a in range(len(cover.parts)):
        if (a, a) not in full and a < len(local):
            full[(a, a)] = {p: p for p in local[a].points()}
    for (a, b), chi in list(full.items()):
        if (b, a) not in full:
            full[(b, a)] = {q: p for p, q in chi.items()}
    return DescentDatum(cover, target, local, full, name)


def _structure_report(d: DescentDatum) -> ValidationReport:
    report = ValidationReport(subject=d.name)
    cover = d.cover
    if len(d.local) != len(cover.parts):
        report.add_structural("index mismatch", len(d.local), len(cover.parts))
        return report
    for a, psi in enumerate(d.local):
        if psi.source is not cover.part_spaces[a] or psi.target is not d.target:
            report.add_structural("index mismatch", a)
    for (a, b) in d.transitions:
        if not (0 <= a < len(cover.parts) and 0 <= b < len(cover.parts)):
            report.add_structural("transition index", a, b)
    if report.structural:
        return report
    for a, b in product(range(len(cover.parts)), repeat=2):
        if cover.overlap(a, b) and (a, b) not in d.transitions:
            report.add_structural("missing transition", a, b)
    return report


def validate_descent(d: DescentDatum) -> ValidationReport:
    """Local maps, transitions as 2-isos on overlaps, normalization and the cocycle condition."""
    report = _structure_report(d)
    if report.structural:
        return report
    cover = d.cover
    for a, psi in enumerate(d.local):
        report.merge(validate_bibundle(psi), prefix=f"part {a} ")
    if not report.ok:
        return report
    for (a, b), chi in sorted(d.transitions.items()):
        mine = d.over(a, cover.overlap(a, b))
        theirs = d.over(b, cover.overlap(a, b))
        report.checks += 1
        if sorted(chi) != list(mine) or sorted(chi.values()) != list(theirs):
            report.add("transition not a bijection on the overlap", a, b)
            continue
        p_a, p_b = d.local[a], d.local[b]
        for p in mine:
            q = chi[p]
            report.checks += 1
            if d.base_point(b, q) != d.base_point(a, p) or p_b.t_p[q] != p_a.t_p[p]:
                report.add("transition moves legs", a, b, p_a.total[p])
                continue
            for h in p_a.right.acting_arrows(p):
                if chi[p_a.ract(p, h)] != p_b.ract(q, h):
                    report.add("transition not equivariant", a, b, p_a.total[p], d.target.arrow_label(h))
    if not report.ok:
        return report
    for a in range(len(cover.parts)):
        if any(d.chi(a, a, p) != p for p in d.local[a].points()):
            report.add("normalization", a, a)
    for a, b in combinations(range(len(cover.parts)), 2):
        if cover.overlap(a, b) and any(d.chi(b, a, d.chi(a, b, p)) != p for p in d.over(a, cover.overlap(a, b))):
            report.add("normalization", a, b)
    for a, b, c in combinations(range(len(cover.parts)), 3):
        for p in d.over(a, cover.overlap(a, b, c)):
            report.checks += 1
            if d.chi(c, a, d.chi(b, c, d.chi(a, b, p))) != p:
                report.add("cocycle", a, b, c, cover.points[d.base_point(a, p)], d.local[a].total[p])
                break
    return report


# ---------------------------------------------------------------------------
# Restriction and gluing
# ---------------------------------------------------------------------------

def _map_on(space: FiniteGroupoid, target: FiniteGroupoid, total, s_p, t_p, ract, name: str) -> Bibundle:
    """A bibundle out of a set: only units act on the left."""
    return make_bibundle(space, target, total, s_p, t_p, lambda g, q: q, ract, name)


def restrict_bibundle(p: Bibundle, cover: Cover, a: int) -> Tuple[Bibundle, Tuple[int, ...]]:
    """ψ over U_a, with the ids of ψ's points kept in order."""
    part = cover.parts[a]
    members = set(part)
    kept = tuple(q for q in p.points() if p.s_p[q] in members)
    pos = {q: i for i, q in enumerate(kept)}
    sub = _map_on(cover.part_spaces[a], p.target,
                  [p.total[q] for q in kept],
                  [cover.local(a, p.s_p[q]) for q in kept],
                  [p.t_p[q] for q in kept],
                  lambda i, h: pos[p.ract(kept[i], h)],
                  f"{p.name}|U{a}")
    return sub, kept


def rebase(p: Bibundle, space: FiniteGroupoid) -> Bibundle:
    """The same map out of a set, with `space` as its source object."""
    if p.source is space:
        return p
    src = p.source
    if src.object_keys != space.object_keys or src.n_arrows != src.n_objects:
        raise StructureError(f"{p.name}: source is not the set {space.name}")
    return _map_on(space, p.target, p.total, p.s_p, p.t_p, p.ract, p.name)


def on_cover(p: Bibundle, cover: Cover) -> Bibundle:
    return rebase(p, cover.space)


def restrict(p: Bibundle, cover: Cover) -> DescentDatum:
    """Restrict ψ: M -> G to each part, with identity transitions."""
    p = on_cover(p, cover)
    pieces = [restrict_bibundle(p, cover, a) for a in range(len(cover.parts))]
    transitions = {}
    for a, b in product(range(len(cover.parts)), repeat=2):
        if not cover.overlap(a, b):
            continue
        into_b = {q: j for j, q in enumerate(pieces[b][1])}
        members = set(cover.overlap(a, b))
        transitions[(a, b)] = {i: into_b[q] for i, q in enumerate(pieces[a][1]) if p.s_p[q] in members}
    return DescentDatum(cover, p.target, tuple(s for s, _ in pieces), transitions, f"{p.name}|{cover.name}")


def glue(d: DescentDatum) -> Bibundle:
    """
    (⊔ ψ_α)/~ with p ~ χ_αβ(p). Each class is named by its member in the
    least part.

    Raises:
        Refusal: the datum does not validate
    """
    report = validate_descent(d)
    if not report.ok:
        first = (report.structural + report.violations)[0]
        raise Refusal("descent datum is invalid", witness=(first.axiom, *first.witness))
    items = [(a, p) for a, psi in enumerate(d.local) for p in psi.points()]
    uf = UnionFind(items)
    for (a, b), chi in d.transitions.items():
        if a < b:
            for p, q in chi.items():
                uf.union((a, p), (b, q))
    classes = uf.classes(items)
    reps = [c[0] for c in classes]
    class_of = {item: i for i, c in enumerate(classes) for item in c}
    glued = _map_on(d.cover.space, d.target,
                    [(a, d.local[a].total[p]) for a, p in reps],
                    [d.base_point(a, p) for a, p in reps],
                    [d.local[a].t_p[p] for a, p in reps],
                    lambda i, h: class_of[(reps[i][0], d.local[reps[i][0]].ract(reps[i][1], h))],
                    f"glue({d.name})")
    assert validate_bibundle(glued).ok, f"{glued.name} is not a bibundle"
    return glued


# ---------------------------------------------------------------------------
# Isomorphisms of descent data
# ---------------------------------------------------------------------------

DescentIso = Tuple[Tuple[int, ...], ...]


def _same_frame(d1: DescentDatum, d2: DescentDatum) -> None:
    if d1.cover is not d2.cover or d1.target is not d2.target:
        raise StructureError(f"{d1.name} and {d2.name} live on different covers or targets")


def _compatible(d1: DescentDatum, d2: DescentDatum, eta: Sequence[Sequence[int]], a: int, b: int) -> bool:
    """χ'_ab ∘ η_a = η_b ∘ χ_ab on U_ab."""
    overlap = d1.cover.overlap(a, b)
    return all(d2.chi(a, b, eta[a][p]) == eta[b][d1.chi(a, b, p)] for p in d1.over(a, overlap))


def check_descent_iso(d1: DescentDatum, d2: DescentDatum, eta: Sequence[Sequence[int]]) -> ValidationReport:
    _same_frame(d1, d2)
    report = ValidationReport(subject=f"{d1.name} => {d2.name}")
    if len(eta) != len(d1.local):
        report.add_structural("index mismatch", len(eta), len(d1.local))
        return report
    for a, (p, q) in enumerate(zip(d1.local, d2.local)):
        report.merge(check_two_iso(p, q, eta[a]), prefix=f"part {a} ")
    if not report.ok:
        return report
    for a, b in product(range(len(eta)), repeat=2):
        if a != b and d1.cover.overlap(a, b):
            report.checks += 1
            if not _compatible(d1, d2, eta, a, b):
                report.add("incompatible with transitions", a, b)
    return report


def enumerate_descent_isos(d1: DescentDatum, d2: DescentDatum) -> Iterator[DescentIso]:
    """All families η_α compatible with the transitions, part by part."""
    _same_frame(d1, d2)
    n = len(d1.local)

    def search(a: int, chosen: List[Tuple[int, ...]]) -> Iterator[DescentIso]:
        if a == n:
            yield tuple(chosen)
            return
        for eta_a in enumerate_two_isos(d1.local[a], d2.local[a]):
            chosen.append(eta_a)
            if all(_compatible(d1, d2, chosen, b, a) for b in range(a) if d1.cover.overlap(a, b)):
                yield from search(a + 1, chosen)
            chosen.pop()

    yield from search(0, [])


def find_descent_iso(d1: DescentDatum, d2: DescentDatum) -> Optional[DescentIso]:
    return next(enumerate_descent_isos(d1, d2), None)


def restrict_two_iso(p: Bibundle, q: Bibundle, alpha: Sequence[int], cover: Cover) -> DescentIso:
    """The family of restrictions of a 2-iso p => q to the parts."""
    eta = []
    for a, part in enumerate(cover.parts):
        members = set(part)
        kept_p = [x for x in p.points() if p.s_p[x] in members]
        pos_q = {y: j for j, y in enumerate(y for y in q.points() if q.s_p[y] in members)}
        eta.append(tuple(pos_q[alpha[x]] for x in kept_p))
    return tuple(eta)


# ---------------------------------------------------------------------------
# Standard-form data and the stack check
# ---------------------------------------------------------------------------

def _standard_local(cover: Cover, target: FiniteGroupoid, a: int, objects: Sequence[int]) -> Bibundle:
    """ψ_a = <U_a -> G, u ↦ objects[i]>."""
    space = cover.part_spaces[a]
    phi = StrictHom(space, target, tuple(objects), tuple(target.unit[y] for y in objects), f"y{a}")
    return from_strict_hom(phi)


def standard_datum(cover: Cover, target: FiniteGroupoid, objects: Sequence[Sequence[int]],
                   arrows: Mapping[Tuple[int, int], int], name: str = "D") -> DescentDatum:
    """
    Descent datum in standard form: ψ_a sends the i-th point of U_a to
    objects[a][i], and χ_ab over u multiplies on the left by
    arrows[(a, b, u)]: y_a(u) -> y_b(u), for a < b.
    """
    local = [_standard_local(cover, target, a, objects[a]) for a in range(len(cover.parts))]
    index = [{key: i for i, key in enumerate(psi.total)} for psi in local]
    transitions = {}
    for a, b in combinations(range(len(cover.parts)), 2):
        overlap = cover.overlap(a, b)
        if not overlap:
            continue
        chi = {}
        for u in overlap:
            k = arrows[(a, b, u)]
            key = cover.points[u]
            for p in local[a].points():
                if local[a].total[p][0] == key:
                    h = target.arrow_id(local[a].total[p][1])
                    chi[p] = index[b][(key, target.arrow_keys[target.mul(k, h)])]
        transitions[(a, b)] = chi
    return descent_datum(cover, target, local, transitions, name)


def _point_arrow_choices(cover: Cover, target: FiniteGroupoid, objects: Sequence[Sequence[int]],
                         u: int) -> Tuple[Tuple[int, ...], List[Tuple[int, ...]]]:
    """Parts containing u, and for each later part the arrows y_first(u) -> y_later(u)."""
    parts = cover.containing(u)
    first = parts[0]
    y0 = objects[first][cover.local(first, u)]
    return parts, [target.hom(y0, objects[b][cover.local(b, u)]) for b in parts[1:]]


def _cocycle_arrows(cover: Cover, target: FiniteGroupoid, parts, u: int, chosen: Sequence[int]) -> Dict:
    """χ_ab(u) = k_b k_a⁻¹ from arrows k_b: y_first(u) -> y_b(u)."""
    ks = {parts[0]: None}
    ks.update(zip(parts[1:], chosen))
    out = {}
    for a, b in combinations(parts, 2):
        if ks[a] is None:
            out[(a, b, u)] = ks[b]
        else:
            out[(a, b, u)] = target.mul(ks[b], target.inv[ks[a]])
    return out


def enumerate_standard_descent_data(cover: Cover, target: FiniteGroupoid) -> Iterator[DescentDatum]:
    """
    Every normalized cocycle in standard form: all object choices per part
    and point, then all arrows from the first part containing each point.
    """
    slots = [(a, i) for a, part in enumerate(cover.parts) for i in range(len(part))]
    count = 0
    for flat in product(target.objects, repeat=len(slots)):
        objects = [[0] * len(part) for part in cover.parts]
        for (a, i), y in zip(slots, flat):
            objects[a][i] = y
        per_point = [_point_arrow_choices(cover, target, objects, u) for u in range(len(cover.points))]
        if any(not arrows for _, choices in per_point for arrows in choices):
            continue
        for picks in product(*[product(*choices) for _, choices in per_point]):
            arrows = {}
            for u, ((parts, _), chosen) in enumerate(zip(per_point, picks)):
                arrows.update(_cocycle_arrows(cover, target, parts, u, chosen))
            yield standard_datum(cover, target, objects, arrows, f"D{count}")
            count += 1


def random_standard_datum(cover: Cover, target: FiniteGroupoid, rng: np.random.Generator,
                          name: str = "D") -> DescentDatum:
    """A standard-form datum with objects drawn within one coarse class per point."""
    objects = [[0] * len(part) for part in cover.parts]
    arrows = {}
    for u in range(len(cover.points)):
        parts = cover.containing(u)
        y0 = int(rng.integers(target.n_objects))
        reachable = sorted({target.tgt[h] for h in target.arrows_from(y0)})
        chosen = []
        for k, a in enumerate(parts):
            y = y0 if k == 0 else reachable[int(rng.integers(len(reachable)))]
            objects[a][cover.local(a, u)] = y
            if k:
                links = target.hom(y0, y)
                chosen.append(links[int(rng.integers(len(links)))])
        arrows.update(_cocycle_arrows(cover, target, parts, u, chosen))
    return standard_datum(cover, target, objects, arrows, name)


class StackCheckReport(BaseModel):
    """Outcome of check_stack_property on one cover and target."""
    cover: str
    target: str
    exhaustive: bool
    seed: Optional[int] = None
    data_checked: int = 0
    pairs_checked: int = 0
    two_isos_matched: int = 0
    pair_limit: Optional[int] = None
    failures: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, what: str, *witness) -> None:
        self.failures.append(Violation(axiom=what, witness=list(witness)))


def check_stack_property(cover: Cover, target: FiniteGroupoid, sample_size: Optional[int] = None,
                         seed: Optional[int] = None) -> StackCheckReport:
    """
    Restriction to the cover is an equivalence of categories: every datum
    is isomorphic to the restriction of its gluing, and 2-isos of glued maps
    restrict bijectively onto isomorphisms of data.

    Exhaustive over standard-form data and all pairs of them when the inputs
    are within the configured bounds, otherwise a seeded sample whose pairs
    are capped at stack_pair_limit.
    """
    cfg = get_config()
    exhaustive = (len(cover.points) <= cfg.stack_exhaustive_points
                  and len(cover.parts) <= cfg.stack_exhaustive_parts
                  and target.n_arrows <= cfg.stack_exhaustive_arrows)
    report = StackCheckReport(cover=cover.name, target=target.name, exhaustive=exhaustive)
    if exhaustive:
        data = list(enumerate_standard_descent_data(cover, target))
    else:
        seed = cfg.default_seed if seed is None else seed
        report.seed = seed
        rng = np.random.default_rng(seed)
        size = sample_size or cfg.stack_sample_size
        data = [random_standard_datum(cover, target, rng, f"D{i}") for i in range(size)]

    glued = []
    for d in tqdm(data, desc="descent data", disable=not cfg.progress):
        report.data_checked += 1
        v = validate_descent(d)
        if not v.ok:
            report.fail("generated datum invalid", d.name, *v.axioms_failed())
            continue
        psi = glue(d)
        back = restrict(psi, cover)
        if find_descent_iso(back, d) is None:
            report.fail("restriction of gluing not isomorphic", d.name)
        if find_two_iso(glue(back), psi) is None:
            report.fail("gluing of restriction not isomorphic", d.name)
        glued.append((d.name, psi, back))

    pairs = [(i, j) for i in range(len(glued)) for j in range(len(glued))]
    if not exhaustive and len(pairs) > cfg.stack_pair_limit:
        report.pair_limit = cfg.stack_pair_limit
        pairs = pairs[:cfg.stack_pair_limit]
    for i, j in tqdm(pairs, desc="2-isos", disable=not cfg.progress):
        report.pairs_checked += 1
        (first, p, rp), (second, q, rq) = glued[i], glued[j]
        isos = list(enumerate_two_isos(p, q))
        restricted = {restrict_two_iso(p, q, alpha, cover) for alpha in isos}
        families = set(enumerate_descent_isos(rp, rq))
        if len(restricted) != len(isos):
            report.fail("restriction not faithful", first, second)
        elif restricted != families:
            report.fail("restriction not full", first, second)
        else:
            report.two_isos_matched += len(isos)
    return report


# ---------------------------------------------------------------------------
# Principal bundles from group cocycles
# ---------------------------------------------------------------------------

def _full_cocycle(cover: Cover, group: FiniteGroup,
                  transitions: Mapping[Tuple[int, int], Mapping[int, int]]) -> Dict[Tuple[int, int], Dict[int, int]]:
    full: Dict[Tuple[int, int], Dict[int, int]] = {}
    for a in range(len(cover.parts)):
        full[(a, a)] = {u: group.identity for u in cover.parts[a]}
    for a, b in combinations(range(len(cover.parts)), 2):
        overlap = cover.overlap(a, b)
        if not overlap:
            continue
        given = transitions.get((a, b))
        if given is None and (b, a) in transitions:
            given = {u: group.inv(k) for u, k in transitions[(b, a)].items()}
        if given is None or sorted(given) != list(overlap):
            raise StructureError(f"{cover.name}: transition ({a}, {b}) does not cover the overlap")
        full[(a, b)] = dict(given)
        full[(b, a)] = {u: group.inv(k) for u, k in given.items()}
    return full


def cocycle_witness(cover: Cover, group: FiniteGroup,
                    transitions: Mapping[Tuple[int, int], Mapping[int, int]]) -> Optional[tuple]:
    """First (a, b, c, point) with k_ab k_bc != k_ac, or None."""
    k = _full_cocycle(cover, group, transitions)
    for a, b, c in combinations(range(len(cover.parts)), 3):
        for u in cover.overlap(a, b, c):
            if group.mul(k[(a, b)][u], k[(b, c)][u]) != k[(a, c)][u]:
                return (a, b, c, cover.points[u])
    return None


def cocycle_datum(cover: Cover, group: FiniteGroup,
                  transitions: Mapping[Tuple[int, int], Mapping[int, int]],
                  target: Optional[FiniteGroupoid] = None, check: bool = True) -> DescentDatum:
    """
    Trivial K-bundles U_α x K glued by χ_αβ(u, h) = (u, k_αβ(u)⁻¹ h).

    Args:
        transitions: (a, b) -> {M-point id: element index}, for a < b
        target: a prebuilt B(K) to reuse
        check: refuse when k_ab k_bc != k_ac

    Raises:
        Refusal: the group cocycle fails on a triple overlap
    """
    if check:
        witness = cocycle_witness(cover, group, transitions)
        if witness is not None:
            raise Refusal("bundle cocycle fails on a triple overlap", witness=witness)
    bk = target if target is not None else b_group(group)
    k = _full_cocycle(cover, group, transitions)
    local = [_standard_local(cover, bk, a, [0] * len(part)) for a, part in enumerate(cover.parts)]
    index = [{key: i for i, key in enumerate(psi.total)} for psi in local]
    out = {}
    for a, b in combinations(range(len(cover.parts)), 2):
        if not cover.overlap(a, b):
            continue
        chi = {}
        for p in local[a].points():
            key, h = local[a].total[p]
            u = cover.points.index(key)
            if u in k[(a, b)]:
                moved = group.mul(group.inv(k[(a, b)][u]), group.index(h))
                chi[p] = index[b][(key, group.label(moved))]
        out[(a, b)] = chi
    return descent_datum(cover, bk, local, out, f"cocycle({group.name})")


def cocycle_to_bundle(cover: Cover, group: FiniteGroup,
                      transitions: Mapping[Tuple[int, int], Mapping[int, int]],
                      target: Optional[FiniteGroupoid] = None) -> Bibundle:
    """The principal K-bundle on M glued from a group cocycle, as a map M -> B(K)."""
    return glue(cocycle_datum(cover, group, transitions, target))


def part_constant_trivialization(cover: Cover, group: FiniteGroup,
                                 transitions: Mapping[Tuple[int, int], Mapping[int, int]]) -> Optional[Tuple[int, ...]]:
    """
    Constants c_α with k_αβ(u) = c_α c_β⁻¹ on every overlap, if any exist.

    This is a section of the bundle over the nerve of the cover; a
    "Möbius" cocycle has none even though M itself is discrete.
    """
    k = _full_cocycle(cover, group, transitions)
    n = len(cover.parts)
    pairs = [(a, b) for a, b in combinations(range(n), 2) if cover.overlap(a, b)]

    def search(chosen: List[int]) -> Optional[Tuple[int, ...]]:
        a = len(chosen)
        if a == n:
            return tuple(chosen)
        for c in group.elements:
            chosen.append(c)
            if all(group.mul(chosen[x], group.inv(c)) == k[(x, y)][u]
                   for x, y in pairs if y == a for u in cover.overlap(x, y)):
                found = search(chosen)
                if found is not None:
                    return found
            chosen.pop()
        return None

    return search([])


def product_of_bundles(p: Bibundle, q: Bibundle, k: FiniteGroup, l: FiniteGroup,
                       target: Optional[FiniteGroupoid] = None) -> Bibundle:
    """P x_M Q as a map M -> B(K x L), acted on componentwise."""
    if p.source is not q.source:
        raise StructureError(f"{p.name} and {q.name} have different sources")
    kl = direct_product(k, l)
    bkl = target if target is not None else b_group(kl)
    pairs = [(x, y) for x in p.points() for y in q.points() if p.s_p[x] == q.s_p[y]]
    pos = {xy: i for i, xy in enumerate(pairs)}
    m = l.order
    return _map_on(p.source, bkl,
                   [(p.total[x], q.total[y]) for x, y in pairs],
                   [p.s_p[x] for x, _ in pairs],
                   [0] * len(pairs),
                   lambda i, c: pos[(p.ract(pairs[i][0], c // m), q.ract(pairs[i][1], c % m))],
                   f"{p.name}x{q.name}")
