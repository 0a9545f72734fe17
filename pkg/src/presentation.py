"""
Presenting a charted groupoid as H⋊K with H purely ineffective.

Pipeline: frame_construction (G ⋉ frames, acted on by Sym(n)), then
band_trivialization (isomorphisms T ≅ S⁰(x), acted on by Aut(T)), then the
two actions are combined into K = Aut(T) x Sym(n) and one strict
homomorphism H⋊K -> G is assembled and certified.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from src.actions import (
    LEFT,
    RIGHT,
    GroupAction,
    GroupActionOnGroupoid,
    GroupoidAction,
    TwoGroupSemidirect,
    action_on_groupoid,
    check_two_group_semidirect,
    group_action,
    groupoid_action,
    semidirect_group,
    semidirect_map,
    semidirect_space,
    translation_groupoid,
    validate_action,
)
from src.bibundle import (
    Bibundle,
    compose,
    decide_weak_equivalence,
    from_strict_hom,
    induced_coarse_map,
    induced_stabilizer_hom,
    is_equivalence,
    is_essential_equivalence,
    opposite_bibundle,
)
from src.charted import (
    ChartedGroupoid,
    effective_stabilizer_witness,
    ineffective_stabilizers,
    is_purely_ineffective,
    validate_charted,
)
from src.errors import Refusal, StructureError
from src.groupoid import (
    FiniteGroupoid,
    StrictHom,
    check_strict_hom,
    coarse_quotient,
    compose_homs,
    invert_strict_iso,
    stabilizer,
)
from src.groups import (
    FiniteGroup,
    are_isomorphic,
    automorphism_group,
    compose_perm,
    invert_perm,
    isomorphisms,
    symmetric_group,
)
from src.reports import Certificate, StageRecord


# ---------------------------------------------------------------------------
# Quotient by a principal bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EquivariantBundleData:
    """
    G acting on F on the left over π, L acting on F on the right, and
    optionally K acting on G and on F.
    """
    groupoid: FiniteGroupoid
    left: GroupoidAction
    structure: GroupAction
    k_on_groupoid: Optional[GroupActionOnGroupoid] = None
    k_on_bundle: Optional[GroupAction] = None


@dataclass(frozen=True, eq=False)
class PrincipalQuotient:
    space: FiniteGroupoid                     # G⋉F
    l_action: GroupActionOnGroupoid           # L on G⋉F
    quotient: FiniteGroupoid                  # (G⋉F)⋊L
    projection: StrictHom                     # (G⋉F)⋊L -> G
    space_map: StrictHom                      # G⋉F -> G
    certificate: Certificate
    k_action: Optional[GroupActionOnGroupoid] = None   # K on G⋉F
    arrow_index: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def arrow(self, g: int, p: int) -> int:
        """Id of (g, p) in G⋉F."""
        return self.arrow_index[(g, p)]


def _bundle_witness(data: EquivariantBundleData) -> Optional[tuple]:
    """First failed hypothesis of the principal-quotient lemma, or None."""
    g, f, l = data.groupoid, data.left, data.structure
    for name, action in (("G-action", f), ("L-action", l)):
        report = validate_action(action)
        if not report.ok:
            return (f"{name} invalid", *report.axioms_failed())
    n = len(f.carrier)
    for p in range(n):
        for b in l.group.elements:
            pl = l.act(p, b)
            if f.base[pl] != f.base[p]:
                return ("pi not L-invariant", f.carrier[p], l.group.label(b))
            for a in f.acting_arrows(p):
                if f.act(pl, a) != l.act(f.act(p, a), b):
                    return ("actions do not commute", f.carrier[p], g.arrow_label(a), l.group.label(b))
    fibers: Dict[int, List[int]] = {}
    for p, x in enumerate(f.base):
        fibers.setdefault(x, []).append(p)
    for x, members in fibers.items():
        orbit = [l.act(members[0], b) for b in l.group.elements]
        if sorted(orbit) != sorted(members):
            return ("L not principal on fiber", g.object_label(x), len(members), len(set(orbit)))
    if data.k_on_groupoid is not None:
        k, kf = data.k_on_groupoid, data.k_on_bundle
        for c in k.group.elements:
            for p in range(n):
                pc = kf.act(p, c)
                if f.base[pc] != k.obj(f.base[p], c):
                    return ("pi not K-equivariant", f.carrier[p], k.group.label(c))
                for a in f.acting_arrows(p):
                    if kf.act(f.act(p, a), c) != f.act(pc, k.arr(a, c)):
                        return ("K-compatibility", f.carrier[p], g.arrow_label(a), k.group.label(c))
                for b in l.group.elements:
                    if kf.act(l.act(p, b), c) != l.act(pc, b):
                        return ("K and L do not commute", f.carrier[p], k.group.label(c), l.group.label(b))
    return None


def principal_quotient_equivalence(data: EquivariantBundleData) -> PrincipalQuotient:
    """
    Build (G⋉F)⋊L with π((g, f), l) = g and certify π as an equivalence
    (and as K-equivariant when K is present).

    Raises:
        Refusal: a hypothesis fails; the witness names the fiber or element
    """
    witness = _bundle_witness(data)
    if witness is not None:
        raise Refusal("equivariant bundle data invalid", witness=witness)
    g, f, l = data.groupoid, data.left, data.structure
    space, pi_space = semidirect_space(f)
    index = {(pi_space(i), space.src[i]): i for i in space.arrows}
    l_action = action_on_groupoid(l.group, space,
                                  lambda p, b: l.act(p, b),
                                  lambda i, b: index[(pi_space(i), l.act(space.src[i], b))],
                                  f"{l.group.name} on {space.name}")
    quotient = semidirect_group(l_action)
    m = l.group.order
    projection = StrictHom(quotient, g, f.base, tuple(pi_space(i // m) for i in quotient.arrows), "pi")

    ess = is_essential_equivalence(projection)
    bib = is_equivalence(from_strict_hom(projection))
    witnesses = ess.witnesses + bib.witnesses
    checks = ess.checks + bib.checks
    detail = {"space_arrows": space.n_arrows, "quotient_arrows": quotient.n_arrows}
    k_action = None
    if data.k_on_groupoid is not None:
        k, kf = data.k_on_groupoid, data.k_on_bundle
        k_action = action_on_groupoid(k.group, space,
                                      lambda p, c: kf.act(p, c),
                                      lambda i, c: index[(k.arr(pi_space(i), c), kf.act(space.src[i], c))],
                                      f"{k.group.name} on {space.name}")
        equivariant = True
        for c in k.group.elements:
            for a in quotient.arrows:
                checks += 1
                i, b = divmod(a, m)
                moved = k_action.arr(i, c) * m + b
                if projection(moved) != k.arr(projection(a), c):
                    equivariant = False
                    witnesses.append(("pi not K-equivariant", quotient.arrow_label(a), k.group.label(c)))
                    break
        detail["k_equivariant"] = equivariant
    cert = Certificate(claim="(G x F) x L is equivalent to G", verified=not witnesses,
                       checks=checks, witnesses=witnesses[:10], detail=detail)
    return PrincipalQuotient(space, l_action, quotient, projection, pi_space, cert, k_action, index)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrameBundle:
    charted: ChartedGroupoid              # G⋉F with pulled-back charts
    symmetric: FiniteGroup
    quotient: PrincipalQuotient
    certificate: Certificate

    @property
    def sym_action(self) -> GroupActionOnGroupoid:
        return self.quotient.l_action


def _pulled_back(g: ChartedGroupoid, pq: PrincipalQuotient, base_of) -> ChartedGroupoid:
    space, pi = pq.space, pq.space_map
    return ChartedGroupoid(space,
                           tuple(g.charts[base_of(p)] for p in space.objects),
                           tuple(g.effect[pi(i)] for i in space.arrows))


def frame_construction(g: ChartedGroupoid) -> FrameBundle:
    """
    F = {(x, f) | f: [n] ≅ L(x)} with g·(x, f) = (t(g), λ_g∘f) and
    (x, f)·σ = (x, f∘σ); certifies G⋉F purely ineffective, its S⁰ the
    pullback of S⁰_G, and (G⋉F)⋊Sym(n) equivalent to G.
    """
    report = validate_charted(g)
    if report.structural:
        raise StructureError(f"{g.name}: {', '.join(report.axioms_failed())}")
    b = g.base
    sym = symmetric_group(g.dimension)
    frames = [(x, f) for x in b.objects for f in sym.labels]
    pos = {fr: i for i, fr in enumerate(frames)}
    carrier = [(b.object_keys[x], f) for x, f in frames]
    left = groupoid_action(b, carrier, [x for x, _ in frames],
                           lambda p, a: pos[(b.tgt[a], compose_perm(g.effect[a], frames[p][1]))],
                           side=LEFT, name="frames")
    right = group_action(sym, carrier,
                         lambda p, s: pos[(frames[p][0], compose_perm(frames[p][1], sym.label(s)))],
                         side=RIGHT, name="Sym on frames")
    pq = principal_quotient_equivalence(EquivariantBundleData(b, left, right))
    space = _pulled_back(g, pq, lambda p: frames[p][0])

    witnesses, checks = [], 0
    pi = is_purely_ineffective(space)
    if not pi:
        witnesses.append(("not purely ineffective", space.base.arrow_label(effective_stabilizer_witness(space))))
    s0_space = ineffective_stabilizers(space)
    s0_base = ineffective_stabilizers(g)
    to_base = pq.space_map
    for p in space.base.objects:
        checks += 1
        images = [to_base(a) for a in s0_space.fiber_arrows(p)]
        if sorted(images) != sorted(s0_base.fiber_arrows(frames[p][0])):
            witnesses.append(("S0 is not the pullback", space.base.object_label(p)))
    witnesses += pq.certificate.witnesses
    cert = Certificate(claim="frame bundle presents G", verified=not witnesses,
                       checks=checks + pq.certificate.checks, witnesses=witnesses,
                       detail={"frames": len(frames), "purely_ineffective": pi,
                               "equivalence": pq.certificate.verified})
    return FrameBundle(space, sym, pq, cert)


# ---------------------------------------------------------------------------
# Band trivialization
# ---------------------------------------------------------------------------

def check_uniform_stabilizers(g: FiniteGroupoid) -> Optional[Tuple[int, int]]:
    """None when every stabilizer is isomorphic to the one at object 0, else (0, x)."""
    if g.n_objects == 0:
        return None
    t = stabilizer(g, 0)
    for x in g.objects:
        if not are_isomorphic(t, stabilizer(g, x)):
            return (0, x)
    return None


@dataclass(frozen=True, eq=False)
class BandTrivialization:
    charted: ChartedGroupoid          # G' = G⋉F'
    band: FiniteGroup                 # T = S⁰(x₀)
    center: Tuple[int, ...]           # Z(T) as element indices of T
    automorphisms: FiniteGroup        # Aut(T)
    quotient: PrincipalQuotient
    trivialization: Callable[[int, int], int]
    certificate: Certificate

    @property
    def aut_action(self) -> GroupActionOnGroupoid:
        return self.quotient.l_action

    def center_group(self) -> FiniteGroup:
        return self.band.subgroup(self.center, f"Z({self.band.name})")


def band_trivialization(g: ChartedGroupoid, k_action: Optional[GroupActionOnGroupoid] = None) -> BandTrivialization:
    """
    F' = {(x, φ) | φ: T ≅ S⁰(x)}, g·(x, φ) = (t(g), gφg⁻¹), (x, φ)·λ = (x, φ∘λ)
    and c((x, φ), a) = (φ(a), (x, φ)) for a in Z(T).

    Args:
        g: purely ineffective charted groupoid
        k_action: optional K acting on g.base, lifted to F' by (x, φ)·k = (x·k, k∘φ)

    Raises:
        Refusal: g is not purely ineffective, or two stabilizers differ
    """
    witness = effective_stabilizer_witness(g)
    if witness is not None:
        raise Refusal("groupoid is not purely ineffective", witness=g.base.arrow_label(witness))
    b = g.base
    if b.n_objects == 0:
        raise Refusal("empty groupoid has no band")
    mismatch = check_uniform_stabilizers(b)
    if mismatch is not None:
        raise Refusal("stabilizers are not isomorphic", witness=tuple(b.object_label(x) for x in mismatch))
    t = stabilizer(b, 0)
    t.name = "T"
    aut = automorphism_group(t)

    frames: List[Tuple[int, Tuple[int, ...]]] = []
    for x in b.objects:
        s_x = stabilizer(b, x)
        frames += [(x, phi) for phi in sorted(tuple(s_x.label(j) for j in iso) for iso in isomorphisms(t, s_x))]
    pos = {fr: i for i, fr in enumerate(frames)}
    carrier = [(b.object_keys[x], tuple(b.arrow_keys[a] for a in phi)) for x, phi in frames]

    def conj(p, a):
        return pos[(b.tgt[a], tuple(b.mul_all(a, c, b.inv[a]) for c in frames[p][1]))]

    left = groupoid_action(b, carrier, [x for x, _ in frames], conj, side=LEFT, name="isos")
    right = group_action(aut, carrier,
                         lambda p, s: pos[(frames[p][0], tuple(frames[p][1][i] for i in aut.label(s)))],
                         side=RIGHT, name="Aut on isos")
    k_on_bundle = None
    if k_action is not None:
        k_on_bundle = group_action(k_action.group, carrier,
                                   lambda p, c: pos[(k_action.obj(frames[p][0], c),
                                                     tuple(k_action.arr(a, c) for a in frames[p][1]))],
                                   side=RIGHT, name="K on isos")
    pq = principal_quotient_equivalence(EquivariantBundleData(b, left, right, k_action, k_on_bundle))
    space = _pulled_back(g, pq, lambda p: frames[p][0])
    center = t.center

    def trivialization(p: int, a: int) -> int:
        return pq.arrow(frames[p][1][a], p)

    h = space.base
    witnesses, checks = [], 0
    for p in h.objects:
        x = frames[p][0]
        s_x = stabilizer(b, x)
        z_x = sorted(s_x.label(i) for i in s_x.center)
        stab = sorted(pq.space_map(a) for a in h.isotropy(p))
        checks += 1
        if stab != z_x:
            witnesses.append(("stabilizer is not the center", h.object_label(p)))
        images = [trivialization(p, a) for a in center]
        if sorted(images) != sorted(h.isotropy(p)):
            witnesses.append(("c not bijective", h.object_label(p)))
        for a in center:
            for c in center:
                checks += 1
                if trivialization(p, t.mul(a, c)) != h.mul(trivialization(p, a), trivialization(p, c)):
                    witnesses.append(("c not multiplicative", h.object_label(p)))
    for gamma in h.arrows:
        p, q = h.src[gamma], h.tgt[gamma]
        for a in center:
            checks += 1
            if h.mul_all(gamma, trivialization(p, a), h.inv[gamma]) != trivialization(q, a):
                witnesses.append(("c not G-equivariant", h.arrow_label(gamma), t.label(a)))
    for p in h.objects:
        for s in aut.elements:
            lam = aut.label(s)
            moved = pq.l_action.obj(p, s)
            for a in center:
                checks += 1
                if trivialization(moved, invert_perm(lam)[a]) != pq.l_action.arr(trivialization(p, a), s):
                    witnesses.append(("c not Aut-equivariant", h.object_label(p), t.label(a)))
    if pq.k_action is not None:
        for p in h.objects:
            for c in k_action.group.elements:
                for a in center:
                    checks += 1
                    if trivialization(pq.k_action.obj(p, c), a) != pq.k_action.arr(trivialization(p, a), c):
                        witnesses.append(("c not K-equivariant", h.object_label(p), t.label(a)))
    witnesses += pq.certificate.witnesses
    cert = Certificate(claim="band trivialized by the center", verified=not witnesses,
                       checks=checks + pq.certificate.checks, witnesses=witnesses[:10],
                       detail={"band_order": t.order, "center_order": len(center),
                               "isos": len(frames), "aut_order": aut.order,
                               "equivalence": pq.certificate.verified})
    return BandTrivialization(space, t, center, aut, pq, trivialization, cert)


# ---------------------------------------------------------------------------
# Presentation
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PresentationCertificate:
    source: ChartedGroupoid
    transcript: List[StageRecord] = field(default_factory=list)
    stage: str = "start"
    presented: Optional[ChartedGroupoid] = None        # H
    band: Optional[FiniteGroup] = None                 # T
    band_center: Optional[FiniteGroup] = None          # Z(T), the stabilizer type of H
    structure_group: Optional[FiniteGroup] = None      # K = Aut(T) x Sym(n)
    action: Optional[GroupActionOnGroupoid] = None     # K on H
    quotient: Optional[FiniteGroupoid] = None          # H⋊K
    comparison: Optional[StrictHom] = None             # H⋊K -> G
    bibundle: Optional[Bibundle] = None
    frames: Optional[FrameBundle] = None
    band_stage: Optional[BandTrivialization] = None
    lemma: Optional[TwoGroupSemidirect] = None

    @property
    def verified(self) -> bool:
        return self.stage == "done" and all(r.ok for r in self.transcript)

    def record(self, stage: str, ok: bool, message: Optional[str] = None, **detail) -> None:
        self.stage = stage
        self.transcript.append(StageRecord(stage=stage, ok=ok, detail=detail, message=message))


def present(g: ChartedGroupoid) -> PresentationCertificate:
    """
    Present G as H⋊K with H purely ineffective and banded by Z(T).

    Stops with a partial certificate when the stabilizers after framing are
    not all isomorphic.
    """
    cert = PresentationCertificate(source=g)
    report = validate_charted(g)
    cert.record("validate", report.ok, None if report.ok else ", ".join(report.axioms_failed()),
                objects=g.base.n_objects, arrows=g.base.n_arrows, dimension=g.dimension)
    if not report.ok:
        return cert

    frames = frame_construction(g)
    cert.frames = frames
    h1 = frames.charted
    cert.record("frames", frames.certificate.verified, None, **frames.certificate.detail)
    if not frames.certificate.verified:
        return cert

    mismatch = check_uniform_stabilizers(h1.base)
    if mismatch is not None:
        names = [h1.base.object_label(x) for x in mismatch]
        cert.record("uniform stabilizers", False, f"stabilizer types differ at {names[0]} and {names[1]}")
        return cert
    cert.record("uniform stabilizers", True)

    band = band_trivialization(h1, frames.sym_action)
    cert.band_stage = band
    cert.record("band", band.certificate.verified, None, **band.certificate.detail)
    if not band.certificate.verified:
        return cert
    h = band.charted
    cert.presented = h
    cert.band = band.band
    cert.band_center = band.center_group()

    # (H⋊Aut)⋊Sym ≅ H⋊(Aut x Sym)
    lemma = check_two_group_semidirect(band.aut_action, band.quotient.k_action, band.quotient.quotient)
    cert.lemma = lemma
    cert.record("combine", lemma.verified, None, checks=lemma.report.checks)
    if not lemma.verified:
        return cert
    cert.structure_group = lemma.combined_action.group
    cert.action = lemma.combined_action
    cert.quotient = lemma.combined

    sym = frames.symmetric
    psi_sym = semidirect_map(band.quotient.projection, lemma.lifted, frames.sym_action,
                             tuple(sym.elements), "psi x Sym",
                             domain=lemma.iterated, codomain=frames.quotient.quotient)
    phi = compose_homs(compose_homs(invert_strict_iso(lemma.iso), psi_sym), frames.quotient.projection)
    bibundle = from_strict_hom(phi)
    cert.comparison = phi
    cert.bibundle = bibundle
    hom_ok = check_strict_hom(phi).ok
    ess = is_essential_equivalence(phi)
    equiv = is_equivalence(bibundle)
    cert.record("equivalence", hom_ok and ess.verified and equiv.verified, None,
                strict_hom=hom_ok, essential=ess.verified, bibundle=equiv.verified, total=len(bibundle))
    if not cert.transcript[-1].ok:
        return cert

    coarse = induced_coarse_map(bibundle)
    cq = coarse_quotient(cert.quotient)
    stab_ok = all(induced_stabilizer_hom(bibundle, x, _image_object(bibundle, x)).is_isomorphism
                  for x in cq.representatives)
    cert.record("invariants", coarse.is_bijection and stab_ok, None,
                classes=len(cq), coarse_bijection=coarse.is_bijection, stabilizers_isomorphic=stab_ok)
    if cert.transcript[-1].ok:
        cert.record("done", True)
    return cert


def _image_object(p: Bibundle, x: int) -> int:
    return p.t_p[next(q for q in p.points() if p.s_p[q] == x)]


# ---------------------------------------------------------------------------
# Trivial center
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SetPresentation:
    points: Tuple[object, ...]
    group: FiniteGroup
    action: GroupAction
    groupoid: FiniteGroupoid          # P⋊K
    bibundle: Bibundle                # P⋊K -> G
    certificate: Certificate
    presentation: PresentationCertificate


def present_trivial_center(g: ChartedGroupoid) -> SetPresentation:
    """
    When Z(T) = 1, replace H by its coarse set P and certify P⋊K ≃ G.

    Raises:
        Refusal: the presentation did not finish, or Z(T) is nontrivial
    """
    pres = present(g)
    if not pres.verified:
        raise Refusal("presentation did not complete", witness=pres.stage)
    if pres.band_center.order != 1:
        raise Refusal("band has nontrivial center", witness=("Z(T)", pres.band_center.order))
    h = pres.presented.base
    k = pres.structure_group
    act = pres.action
    cq = coarse_quotient(h)
    points = tuple(h.object_keys[x] for x in cq.representatives)
    on_p = group_action(k, points, lambda i, c: cq.class_of[act.obj(cq.classes[i][0], c)],
                        side=RIGHT, name=f"{k.name} on P")
    p_k = translation_groupoid(on_p, name=f"P{len(points)}x{k.name}")
    m = k.order
    hk = pres.quotient
    alpha = StrictHom(hk, p_k, cq.class_of,
                      tuple(cq.class_of[h.tgt[a // m]] * m + a % m for a in hk.arrows), "alpha")
    alpha_ok = check_strict_hom(alpha).ok and is_essential_equivalence(alpha).verified
    bib = compose(opposite_bibundle(from_strict_hom(alpha)), pres.bibundle)
    equiv = is_equivalence(bib)
    weak = decide_weak_equivalence(p_k, g.base, construct=False)
    witnesses = list(equiv.witnesses)
    if not alpha_ok:
        witnesses.append(("H x K -> P x K is not an essential equivalence",))
    if not weak.equivalent:
        witnesses.append(("invariants differ", weak.report.reason))
    cert = Certificate(claim="P x K is equivalent to G", verified=not witnesses,
                       checks=equiv.checks, witnesses=witnesses,
                       detail={"points": len(points), "presented_objects": h.n_objects,
                               "group_order": k.order})
    return SetPresentation(points, k, on_p, p_k, bib, cert, pres)
