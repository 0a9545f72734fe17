"""
CERT v1: self-contained certificates and their standalone verifier.

A certificate file carries the raw tables (groupoids, group, action,
bibundle) followed by a CERT block naming them. The verifier rebuilds every
derived groupoid from those tables and re-runs the checks; the stage lines
and counts in the CERT block are compared, never trusted.
"""
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from src.actions import GroupActionOnGroupoid, validate_action
from src.bibundle import Bibundle, induced_coarse_map, is_equivalence, validate_bibundle
from src.charted import ChartedGroupoid, is_purely_ineffective, validate_charted
from src.errors import StructureError
from src.formats import (
    Library,
    render_block,
    write_bibundle,
    write_gaction,
    write_group,
    write_groupoid,
    write_semidirect,
)
from src.groupoid import FiniteGroupoid, stabilizer, validate_groupoid
from src.groups import FiniteGroup, are_isomorphic, validate_group
from src.reports import StageRecord, Violation

PRESENTATION_CLAIMS = ("present", "frames", "band")
CLAIMS = PRESENTATION_CLAIMS + ("equivalence",)


def presentation_certificate(claim: str, source: ChartedGroupoid, presented: ChartedGroupoid,
                             group: FiniteGroup, action: GroupActionOnGroupoid, bibundle: Bibundle,
                             band: Optional[FiniteGroup] = None,
                             stages: Sequence[StageRecord] = (), verified: bool = True) -> str:
    """
    Tables for G, H, K, the K-action on H and the bibundle H⋊K -> G, then
    the CERT block.
    """
    if claim not in PRESENTATION_CLAIMS:
        raise StructureError(f"unknown presentation claim {claim!r}")
    parts = [
        write_groupoid(source.base, "G", source),
        write_groupoid(presented.base, "H", presented),
        write_group(group, "K"),
        write_gaction(action, "act", "K", "H"),
        write_semidirect("Q", "act"),
        write_bibundle(bibundle, "P", "Q", "G"),
    ]
    lines = [f"claim {claim}", "source G", "presented H", "group K", "action act", "quotient Q", "bibundle P"]
    if band is not None:
        parts.append(write_group(band, "Z"))
        lines.append("band Z")
    lines += [f"stage {r.stage.replace(' ', '_')} {'ok' if r.ok else 'fail'}" for r in stages]
    lines += [f"count {k} {v}" for k, v in _presentation_counts(presented.base, group, bibundle).items()]
    lines.append(f"verdict {'verified' if verified else 'failed'}")
    parts.append(render_block("CERT", lines))
    return "".join(parts)


def equivalence_certificate(source: FiniteGroupoid, target: FiniteGroupoid, bibundle: Bibundle,
                            verified: bool = True) -> str:
    lines = ["claim equivalence", "source G", "target H", "bibundle P",
             f"count points {len(bibundle)}", f"verdict {'verified' if verified else 'failed'}"]
    return "".join([
        write_groupoid(source, "G"),
        write_groupoid(target, "H"),
        write_bibundle(bibundle, "P", "G", "H"),
        render_block("CERT", lines),
    ])


def _presentation_counts(h: FiniteGroupoid, k: FiniteGroup, p: Bibundle) -> Dict[str, int]:
    return {"presented_objects": h.n_objects, "presented_arrows": h.n_arrows,
            "group_order": k.order, "points": len(p)}


class CertificateCheck(BaseModel):
    """Verdict of re-checking one CERT block."""
    claim: str
    verified: bool = True
    passed: List[str] = Field(default_factory=list)
    failures: List[Violation] = Field(default_factory=list)

    def check(self, what: str, ok: bool, *witness) -> bool:
        if ok:
            self.passed.append(what)
        else:
            self.verified = False
            self.failures.append(Violation(axiom=what, witness=list(witness)))
        return ok


def _resolve(lib: Library, record: Dict, key: str, table: str):
    if key not in record:
        raise StructureError(f"certificate is missing {key!r}")
    return lib.first(table, record[key])


def verify_record(lib: Library, record: Dict) -> CertificateCheck:
    claim = record["claim"]
    if claim not in CLAIMS:
        raise StructureError(f"unknown claim {claim!r}")
    result = CertificateCheck(claim=claim)
    if claim == "equivalence":
        g = _resolve(lib, record, "source", "groupoids")
        h = _resolve(lib, record, "target", "groupoids")
        p = _resolve(lib, record, "bibundle", "bibundles")
        _check_groupoid(result, "source", g)
        _check_groupoid(result, "target", h)
        result.check("bibundle endpoints", p.source is g and p.target is h)
        _check_bibundle(result, p)
    else:
        _verify_presentation(lib, record, result)
    counts = record.get("counts", {})
    if claim == "equivalence" and "points" in counts:
        p = _resolve(lib, record, "bibundle", "bibundles")
        result.check("count points", counts["points"] == len(p), counts["points"], len(p))
    failed = [name for name, ok in record.get("stages", []) if not ok]
    result.check("stages", not failed, *failed)
    verdict = record.get("verdict")
    result.check("verdict", verdict == "verified", verdict)
    return result


def _check_groupoid(result: CertificateCheck, what: str, g: FiniteGroupoid) -> None:
    report = validate_groupoid(g)
    result.check(f"{what} is a groupoid", report.ok, *report.axioms_failed())


def _check_bibundle(result: CertificateCheck, p: Bibundle) -> None:
    report = validate_bibundle(p)
    if not result.check("bibundle axioms", report.ok, *[str(v) for v in (report.structural + report.violations)[:3]]):
        return
    cert = is_equivalence(p)
    result.check("bibundle is an equivalence", cert.verified, *cert.witnesses[:3])
    if cert.verified:
        coarse = induced_coarse_map(p)
        result.check("coarse map is a bijection", coarse.is_bijection, coarse.witness)


def _verify_presentation(lib: Library, record: Dict, result: CertificateCheck) -> None:
    g_name, h_name = record.get("source"), record.get("presented")
    if g_name not in lib.charted or h_name not in lib.charted:
        raise StructureError("presentation certificates need charted source and presented groupoids")
    g, h = lib.charted[g_name], lib.charted[h_name]
    k = _resolve(lib, record, "group", "groups")
    act = _resolve(lib, record, "action", "gactions")
    q = _resolve(lib, record, "quotient", "groupoids")
    p = _resolve(lib, record, "bibundle", "bibundles")
    for what, c in (("source", g), ("presented", h)):
        report = validate_charted(c)
        result.check(f"{what} is a charted groupoid", report.ok, *report.axioms_failed())
    report = validate_group(k)
    result.check("group axioms", report.ok, *report.axioms_failed())
    result.check("action acts on the presented groupoid", act.group is k and act.target is h.base)
    report = validate_action(act)
    result.check("action axioms", report.ok, *report.axioms_failed())
    if not result.verified:
        return
    _check_groupoid(result, "quotient", q)
    result.check("bibundle endpoints", p.source is q and p.target is g.base)
    result.check("presented groupoid is purely ineffective", is_purely_ineffective(h))
    if "band" in record:
        z = lib.first("groups", record["band"])
        bad = next((x for x in h.base.objects if not are_isomorphic(stabilizer(h.base, x), z)), None)
        result.check("stabilizers are the band", bad is None,
                     None if bad is None else h.base.object_label(bad))
    _check_bibundle(result, p)
    counts = _presentation_counts(h.base, k, p)
    for name, value in sorted(record.get("counts", {}).items()):
        result.check(f"count {name}", counts.get(name) == value, value, counts.get(name))


def verify_certificate(path) -> List[CertificateCheck]:
    """
    Re-check every CERT block in a file.

    Raises:
        StructureError: the file is malformed or holds no certificate
    """
    lib = Library().read_file(path)
    if not lib.certificates:
        raise StructureError(f"{path}: no CERT block")
    return [verify_record(lib, record) for record in lib.certificates]
