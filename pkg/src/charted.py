"""
Charted groupoids: the discrete model of an étale groupoid.

Each object x carries a chart L(x), an ordered tuple of n points, and each
arrow g carries its effect λ_g: L(s(g)) -> L(t(g)), stored as a position map
(effect[g][i] = j sends the i-th point of L(s(g)) to the j-th point of L(t(g))).
A whole chart bijection plays the role of a germ.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Optional, Sequence, Tuple

from src.bibundle import from_strict_hom, is_equivalence, is_essential_equivalence
from src.errors import Refusal, StructureError
from src.groupoid import (
    FiniteGroupoid,
    StrictHom,
    build_groupoid,
    coarse_quotient,
    relabel,
    stabilizer,
    trivial_groupoid,
    validate_groupoid,
)
from src.groups import FiniteGroup, Perm, are_isomorphic, compose_perm, group_from_operation, invert_perm
from src.reports import Certificate, ValidationReport


@dataclass(frozen=True, eq=False)
class ChartedGroupoid:
    base: FiniteGroupoid
    charts: Tuple[Tuple[Hashable, ...], ...]
    effect: Tuple[Perm, ...]

    def __repr__(self) -> str:
        return f"ChartedGroupoid({self.base.name}, n={self.dimension})"

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def dimension(self) -> int:
        return len(self.charts[0]) if self.charts else 0

    def is_trivial_effect(self, g: int) -> bool:
        return self.effect[g] == tuple(range(len(self.effect[g])))

    @cached_property
    def ineffective_arrows(self) -> Tuple[int, ...]:
        b = self.base
        return tuple(g for g in b.arrows if b.src[g] == b.tgt[g] and self.is_trivial_effect(g))


def charted(base: FiniteGroupoid, charts: Sequence[Sequence[Hashable]],
            effect: Callable[[int], Sequence[int]]) -> ChartedGroupoid:
    """Attach charts (per object) and effects (per arrow, as position maps)."""
    return ChartedGroupoid(base, tuple(tuple(c) for c in charts),
                           tuple(tuple(effect(g)) for g in base.arrows))


def with_trivial_charts(base: FiniteGroupoid, n: int = 1) -> ChartedGroupoid:
    """Charts of size n on which every arrow acts as the identity."""
    ident = tuple(range(n))
    return ChartedGroupoid(base, tuple(ident for _ in base.objects), tuple(ident for _ in base.arrows))


def validate_charted(g: ChartedGroupoid) -> ValidationReport:
    """Groupoid axioms, uniform chart size, and functoriality of the effect."""
    report = validate_groupoid(g.base)
    report.subject = g.name
    b = g.base
    if len(g.charts) != b.n_objects or len(g.effect) != b.n_arrows:
        report.add_structural("chart table length", len(g.charts), len(g.effect))
        return report
    sizes = sorted({len(c) for c in g.charts})
    if len(sizes) > 1:
        report.add_structural("non-uniform charts", *sizes)
    for x, chart in enumerate(g.charts):
        if len(set(chart)) != len(chart):
            report.add_structural("repeated chart point", b.object_keys[x])
    n = g.dimension
    for a in b.arrows:
        if sorted(g.effect[a]) != list(range(n)):
            report.add_structural("effect is not a bijection", b.arrow_keys[a], g.effect[a])
    if not report.ok:
        return report
    for x in b.objects:
        report.checks += 1
        if not g.is_trivial_effect(b.unit[x]):
            report.add("effect of unit", b.object_keys[x])
    for a in b.arrows:
        report.checks += 1
        if g.effect[b.inv[a]] != invert_perm(g.effect[a]):
            report.add("effect of inverse", b.arrow_keys[a])
    for (a, c), ac in b.comp.items():
        report.checks += 1
        if g.effect[ac] != compose_perm(g.effect[a], g.effect[c]):
            report.add("effect of composite", b.arrow_keys[a], b.arrow_keys[c])
    return report


def relabel_charted(g: ChartedGroupoid, object_perm: Sequence[int], arrow_perm: Sequence[int]) -> ChartedGroupoid:
    base = relabel(g.base, object_perm, arrow_perm)
    charts = [None] * base.n_objects
    effect = [None] * base.n_arrows
    for x, c in enumerate(g.charts):
        charts[object_perm[x]] = c
    for a, e in enumerate(g.effect):
        effect[arrow_perm[a]] = e
    return ChartedGroupoid(base, tuple(charts), tuple(effect))


# ---------------------------------------------------------------------------
# Ineffective stabilizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalSystem:
    """A group per object with conjugation transport along arrows."""
    groupoid: FiniteGroupoid
    fibers: Tuple[FiniteGroup, ...]

    def transport(self, h: int, a: int) -> int:
        """Move a in the fiber over t(h) to the fiber over s(h): a ↦ h⁻¹ a h."""
        g = self.groupoid
        return g.mul_all(g.inv[h], a, h)

    def fiber_arrows(self, x: int) -> Tuple[int, ...]:
        return tuple(self.fibers[x].labels)


def ineffective_stabilizers(g: ChartedGroupoid) -> LocalSystem:
    """S⁰: at each x, the stabilizer arrows with trivial effect."""
    b = g.base
    fibers = []
    for x in b.objects:
        s_x = stabilizer(b, x)
        members = [i for i, a in enumerate(s_x.labels) if g.is_trivial_effect(a)]
        fibers.append(s_x.subgroup(members, f"S0({b.object_label(x)})"))
    return LocalSystem(b, tuple(fibers))


def check_S0_equivariance(g: ChartedGroupoid) -> Certificate:
    """
    Closure of S⁰ under conjugation, normality of each fiber in S_x, and
    transport being a group isomorphism along every arrow.

    A failure is impossible for a validated input.
    """
    b = g.base
    s0 = ineffective_stabilizers(g)
    members = [set(s0.fiber_arrows(x)) for x in b.objects]
    witnesses, checks = [], 0
    for x in b.objects:
        s_x = stabilizer(b, x)
        checks += 1
        if not s_x.is_normal([s_x.index(a) for a in members[x]]):
            witnesses.append(("not normal", b.object_label(x)))
        for h in b.arrows_into(x):
            y = b.src[h]
            images = {}
            for a in members[x]:
                checks += 1
                c = s0.transport(h, a)
                images[a] = c
                if c not in members[y]:
                    witnesses.append(("conjugate leaves S0", b.arrow_label(a), b.arrow_label(h)))
            if set(images.values()) != members[y]:
                witnesses.append(("transport not bijective", b.arrow_label(h)))
            for a in members[x]:
                for c in members[x]:
                    checks += 1
                    if images[b.mul(a, c)] != b.mul(images[a], images[c]):
                        witnesses.append(("transport not multiplicative", b.arrow_label(h)))
    return Certificate(claim="S0 is a conjugation-closed local system of normal subgroups",
                       verified=not witnesses, checks=checks, witnesses=witnesses[:10])


def local_system_uniform(g: ChartedGroupoid) -> bool:
    """All S⁰ fibers over one coarse class are isomorphic."""
    s0 = ineffective_stabilizers(g)
    cq = coarse_quotient(g.base)
    return all(are_isomorphic(s0.fibers[c[0]], s0.fibers[x]) for c in cq.classes for x in c[1:])


# ---------------------------------------------------------------------------
# Effectivization and predicates
# ---------------------------------------------------------------------------

def effectivization(g: ChartedGroupoid) -> Tuple[ChartedGroupoid, StrictHom]:
    """
    G_eff = G₁/S⁰: arrows are the distinct (src, tgt, λ) triples, in sorted order.

    Returns:
        (G_eff, p) with p the class map
    """
    b = g.base
    triples = sorted({(b.src[a], b.tgt[a], g.effect[a]) for a in b.arrows})
    eff = build_groupoid(b.objects, triples,
                         src=lambda c: c[0], tgt=lambda c: c[1],
                         compose=lambda c, d: (d[0], c[1], compose_perm(c[2], d[2])),
                         unit=lambda x: (x, x, tuple(range(g.dimension))),
                         inverse=lambda c: (c[1], c[0], invert_perm(c[2])),
                         name=f"{b.name}_eff")
    eff = FiniteGroupoid(b.object_keys,
                         tuple((b.object_keys[s], b.object_keys[t], lam) for s, t, lam in triples),
                         eff.src, eff.tgt, eff.unit, eff.inv, eff.comp, eff.name)
    pos = {c: i for i, c in enumerate(triples)}
    p = StrictHom(b, eff, tuple(b.objects),
                  tuple(pos[(b.src[a], b.tgt[a], g.effect[a])] for a in b.arrows), "p")
    return ChartedGroupoid(eff, g.charts, tuple(lam for _, _, lam in triples)), p


def is_purely_ineffective(g: ChartedGroupoid) -> bool:
    b = g.base
    return all(g.is_trivial_effect(a) for a in b.arrows if b.src[a] == b.tgt[a])


def is_effective(g: ChartedGroupoid) -> bool:
    units = set(g.base.unit)
    return all(a in units for a in g.ineffective_arrows)


def effective_stabilizer_witness(g: ChartedGroupoid) -> Optional[int]:
    """An isotropy arrow with nontrivial effect, if any."""
    b = g.base
    for a in b.arrows:
        if b.src[a] == b.tgt[a] and not g.is_trivial_effect(a):
            return a
    return None


def equivalent_to_set(g: FiniteGroupoid) -> Optional[Tuple[Tuple[int, ...], ...]]:
    """The coarse classes when every stabilizer is trivial, else None."""
    if any(len(g.isotropy(x)) != 1 for x in g.objects):
        return None
    return coarse_quotient(g).classes


def coarse_set(g: FiniteGroupoid, name: Optional[str] = None) -> Tuple[FiniteGroupoid, StrictHom]:
    """The coarse quotient as a trivial groupoid, with the projection G -> G_top."""
    cq = coarse_quotient(g)
    reps = [g.object_keys[x] for x in cq.representatives]
    m = trivial_groupoid(reps, name or f"{g.name}_top")
    return m, StrictHom(g, m, cq.class_of, tuple(cq.class_of[g.src[a]] for a in g.arrows), "top")


@dataclass(frozen=True, eq=False)
class CoarseEquivalence:
    effective: ChartedGroupoid
    projection: StrictHom
    certificate: Certificate


def pi_coarse_equivalence(g: ChartedGroupoid) -> CoarseEquivalence:
    """
    For purely ineffective G, certify G_eff -> G_top as an essential equivalence.

    Raises:
        Refusal: G has a stabilizer arrow with nontrivial effect
    """
    witness = effective_stabilizer_witness(g)
    if witness is not None:
        raise Refusal("groupoid is not purely ineffective", witness=g.base.arrow_label(witness))
    eff, _ = effectivization(g)
    top, proj = coarse_set(eff.base)
    ess = is_essential_equivalence(proj)
    bib = is_equivalence(from_strict_hom(proj))
    cert = Certificate(claim="G_eff is equivalent to its coarse quotient",
                       verified=ess.verified and bib.verified,
                       checks=ess.checks + bib.checks,
                       witnesses=ess.witnesses + bib.witnesses,
                       detail={"classes": top.n_objects})
    return CoarseEquivalence(eff, proj, cert)


def stabilizer_group_of_effect(g: ChartedGroupoid, x: int) -> FiniteGroup:
    """Image of S_x in Sym(n) under the effect map."""
    images = sorted({g.effect[a] for a in g.base.isotropy(x)})
    if not images:
        raise StructureError(f"no isotropy at {x}")
    return group_from_operation(images, compose_perm, f"eff({g.base.object_label(x)})")
