"""
Command-line front end.

    python run.py validate data/fixtures/bz2.grpd
    python run.py present data/fixtures/bz4_swap.grpd --out bz4.cert
    python run.py verify bz4.cert

Exit codes: 0 success or a true verdict, 1 a mathematically negative
verdict, 2 an input problem (missing file, parse error, size guardrail).
"""
import argparse
import os
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, field_validator
from rich.console import Console
from rich.markup import escape

from src.actions import validate_action
from src.bibundle import compose, decide_weak_equivalence, from_strict_hom, is_equivalence, validate_bibundle
from src.certificate import equivalence_certificate, presentation_certificate, verify_certificate
from src.charted import (
    ChartedGroupoid,
    effectivization,
    is_effective,
    is_purely_ineffective,
    validate_charted,
    with_trivial_charts,
)
from src.config import get_config
from src.descent import check_stack_property, glue, validate_descent
from src.errors import GroupoidError, Refusal, StructureError
from src.formats import Library, read_library, write_bibundle, write_groupoid
from src.groupoid import FiniteGroupoid, validate_groupoid
from src.groups import validate_group
from src.presentation import band_trivialization, frame_construction, present
from src.reports import StageRecord, ValidationReport
from src.run_orchestrator import RunOrchestrator

COMMANDS = ("validate", "effectivize", "frames", "band", "present",
            "equiv", "compose", "glue", "stackcheck", "verify")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


class Job(BaseModel):
    """One CLI invocation."""
    command: str
    inputs: List[str] = Field(default_factory=list)
    out: Optional[str] = None
    seed: Optional[int] = None
    max_size: Optional[int] = None
    name: Optional[str] = None

    @field_validator("command")
    @classmethod
    def known_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"unknown command {value!r}")
        return value


class Session:
    """Console plus log sink for one job."""

    def __init__(self, job: Job, console: Optional[Console] = None, quiet: bool = False):
        self.job = job
        self.console = console or Console(highlight=False, soft_wrap=True)
        self.log = RunOrchestrator(quiet=quiet)

    def line(self, tag: str, text: str, style: str = "") -> None:
        label = escape(f"[{tag}]")
        if style:
            label = f"[{style}]{label}[/{style}]"
        self.console.print(f"{label} {escape(text)}")

    def say(self, text: str) -> None:
        self.console.print(escape(text))

    def report(self, what: str, report: ValidationReport) -> bool:
        if report.ok:
            self.line("OK", f"{what}: {report.checks} checks", "green")
        else:
            self.line("FAIL", f"{what}: {', '.join(report.axioms_failed())}", "red")
            for v in (report.structural + report.violations)[:5]:
                self.say(f"    {v}")
        return report.ok

    def transcript(self, records: Sequence[StageRecord]) -> None:
        for r in records:
            extra = f" ({r.message})" if r.message else ""
            detail = " ".join(f"{k}={v}" for k, v in sorted(r.detail.items()))
            self.line("OK" if r.ok else "FAIL", f"{r.stage}{extra} {detail}".rstrip(),
                      "green" if r.ok else "red")

    def write(self, text: str) -> None:
        if self.job.out:
            self.log.write_artifact(self.job.out, text)


def _charted(lib: Library, name: Optional[str]) -> ChartedGroupoid:
    """The named (or first) groupoid; one without charts gets one-point charts."""
    g = lib.first("groupoids", name)
    for c in lib.charted.values():
        if c.base is g:
            return c
    return with_trivial_charts(g)


def _groupoid_name(lib: Library, g: FiniteGroupoid) -> str:
    return next(n for n, h in lib.groupoids.items() if h is g)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _validate(s: Session, lib: Library) -> int:
    ok = True
    for name, group in lib.groups.items():
        ok &= s.report(f"group {name}", validate_group(group))
    for name, g in lib.groupoids.items():
        if name in lib.charted:
            ok &= s.report(f"charted groupoid {name}", validate_charted(lib.charted[name]))
        else:
            ok &= s.report(f"groupoid {name}", validate_groupoid(g))
    for table in ("actions", "gactions"):
        for name, action in getattr(lib, table).items():
            ok &= s.report(f"action {name}", validate_action(action))
    for name, p in lib.bibundles.items():
        ok &= s.report(f"bibundle {name}", validate_bibundle(p))
    for name, cover in lib.covers.items():
        s.line("OK", f"cover {name}: {len(cover.points)} points, {len(cover.parts)} parts", "green")
    for name, d in lib.descents.items():
        ok &= s.report(f"descent {name}", validate_descent(d))
    return EXIT_OK if ok else EXIT_NEGATIVE


def _effectivize(s: Session, lib: Library) -> int:
    g = _charted(lib, s.job.name)
    eff, p = effectivization(g)
    s.say(f"{g.name}: {g.base.n_objects} objects, {g.base.n_arrows} arrows")
    s.say(f"{eff.name}: {eff.base.n_objects} objects, {eff.base.n_arrows} arrows")
    s.say(f"purely ineffective: {is_purely_ineffective(g)}")
    s.say(f"effective after quotient: {is_effective(eff)}")
    s.write(write_groupoid(eff.base, f"{g.name}_eff", eff))
    return EXIT_OK


def _frames(s: Session, lib: Library) -> int:
    g = _charted(lib, s.job.name)
    fr = frame_construction(g)
    cert = fr.certificate
    s.transcript([StageRecord(stage="frames", ok=cert.verified, detail=cert.detail)])
    for w in cert.witnesses[:5]:
        s.say(f"    {w}")
    if cert.verified:
        s.write(presentation_certificate("frames", g, fr.charted, fr.symmetric, fr.sym_action,
                                         from_strict_hom(fr.quotient.projection),
                                         stages=[StageRecord(stage="frames", ok=True)]))
    return EXIT_OK if cert.verified else EXIT_NEGATIVE


def _band(s: Session, lib: Library) -> int:
    g = _charted(lib, s.job.name)
    bt = band_trivialization(g)
    cert = bt.certificate
    s.transcript([StageRecord(stage="band", ok=cert.verified, detail=cert.detail)])
    for w in cert.witnesses[:5]:
        s.say(f"    {w}")
    if cert.verified:
        s.say(f"band {bt.band.name} of order {bt.band.order}, center of order {len(bt.center)}")
        s.write(presentation_certificate("band", g, bt.charted, bt.automorphisms, bt.aut_action,
                                         from_strict_hom(bt.quotient.projection), band=bt.center_group(),
                                         stages=[StageRecord(stage="band", ok=True)]))
    return EXIT_OK if cert.verified else EXIT_NEGATIVE


def _present(s: Session, lib: Library) -> int:
    g = _charted(lib, s.job.name)
    cert = present(g)
    s.transcript(cert.transcript)
    if not cert.verified:
        return EXIT_NEGATIVE
    h = cert.presented.base
    s.say(f"presented by {h.n_objects} objects, {h.n_arrows} arrows under a group of order "
          f"{cert.structure_group.order}; band center of order {cert.band_center.order}")
    s.write(presentation_certificate("present", g, cert.presented, cert.structure_group, cert.action,
                                     cert.bibundle, band=cert.band_center, stages=cert.transcript))
    return EXIT_OK


def _equiv(s: Session, inputs: Sequence[str]) -> int:
    if len(inputs) >= 2:
        g = Library().read_file(inputs[0]).first("groupoids")
        h = Library().read_file(inputs[1]).first("groupoids")
    else:
        pair = list(read_library(inputs).groupoids.values())[:2]
        if len(pair) < 2:
            raise StructureError("equiv needs two groupoids")
        g, h = pair
    w = decide_weak_equivalence(g, h, construct=bool(s.job.out))
    for side, rows in (("left", w.report.left_classes), ("right", w.report.right_classes)):
        for r in rows:
            s.say(f"  {side} class {r.representative}: size {r.size}, stabilizer order "
                  f"{r.stabilizer_order}{', abelian' if r.stabilizer_abelian else ''}")
    s.line("OK" if w.equivalent else "NO", w.report.reason, "green" if w.equivalent else "yellow")
    if w.equivalent and w.bibundle is not None:
        s.write(equivalence_certificate(g, h, w.bibundle))
    return EXIT_OK if w.equivalent else EXIT_NEGATIVE


def _compose(s: Session, lib: Library) -> int:
    pair = list(lib.bibundles.values())[:2]
    if len(pair) < 2:
        raise StructureError("compose needs two bibundles")
    p, q = pair
    pq = compose(p, q)
    cert = is_equivalence(pq)
    s.say(f"{p.name} then {q.name}: {len(pq)} points, equivalence: {cert.verified}")
    src, tgt = _groupoid_name(lib, pq.source), _groupoid_name(lib, pq.target)
    blocks = write_groupoid(pq.source, src)
    if pq.target is not pq.source:
        blocks += write_groupoid(pq.target, tgt)
    s.write(blocks + write_bibundle(pq, s.job.name or f"{p.name}_{q.name}", src, tgt))
    return EXIT_OK


def _glue(s: Session, lib: Library) -> int:
    d = lib.first("descents", s.job.name)
    report = validate_descent(d)
    if not s.report(f"descent {d.name}", report):
        return EXIT_NEGATIVE
    psi = glue(d)
    s.say(f"glued {d.name}: {len(psi)} points over {len(d.cover.points)} base points")
    target = _groupoid_name(lib, d.target)
    s.write(write_groupoid(d.cover.space, d.cover.name) + write_groupoid(d.target, target)
            + write_bibundle(psi, f"{d.name}_glued", d.cover.name, target))
    return EXIT_OK


def _stackcheck(s: Session, lib: Library) -> int:
    cover = lib.first("covers")
    target = lib.first("groupoids", s.job.name)
    report = check_stack_property(cover, target, seed=s.job.seed)
    mode = "exhaustive" if report.exhaustive else f"sampled (seed {report.seed})"
    if report.pair_limit is not None:
        mode += f", pairs capped at {report.pair_limit}"
    s.say(f"cover {report.cover} over {report.target}: {mode}")
    s.say(f"  data {report.data_checked}, pairs {report.pairs_checked}, 2-isos {report.two_isos_matched}")
    for v in report.failures[:5]:
        s.say(f"    {v}")
    s.line("OK" if report.ok else "FAIL", "stack property", "green" if report.ok else "red")
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def _verify(s: Session, inputs: Sequence[str]) -> int:
    ok = True
    for path in inputs:
        for check in verify_certificate(path):
            s.line("OK" if check.verified else "FAIL", f"{path}: claim {check.claim}, "
                   f"{len(check.passed)} checks passed", "green" if check.verified else "red")
            for v in check.failures:
                s.say(f"    {v}")
            ok &= check.verified
    return EXIT_OK if ok else EXIT_NEGATIVE


LIBRARY_COMMANDS: Dict[str, Callable[[Session, Library], int]] = {
    "validate": _validate,
    "effectivize": _effectivize,
    "frames": _frames,
    "band": _band,
    "present": _present,
    "compose": _compose,
    "glue": _glue,
    "stackcheck": _stackcheck,
}


def run(job: Job, console: Optional[Console] = None, quiet: bool = False) -> int:
    """Run one job and return its exit code. --max-size applies to this job only."""
    if job.max_size is None:
        return _run(job, console, quiet)
    previous = os.environ.get("GROUPOID_MAX_SIZE")
    os.environ["GROUPOID_MAX_SIZE"] = str(job.max_size)
    get_config.cache_clear()
    try:
        return _run(job, console, quiet)
    finally:
        if previous is None:
            os.environ.pop("GROUPOID_MAX_SIZE", None)
        else:
            os.environ["GROUPOID_MAX_SIZE"] = previous
        get_config.cache_clear()


def _run(job: Job, console: Optional[Console], quiet: bool) -> int:
    s = Session(job, console, quiet)
    try:
        if job.command == "equiv":
            code = _equiv(s, job.inputs)
        elif job.command == "verify":
            code = _verify(s, job.inputs)
        else:
            code = LIBRARY_COMMANDS[job.command](s, read_library(job.inputs))
    except Refusal as exc:
        s.line("NO", str(exc), "yellow")
        s.log.append_log(f"[WARN] {job.command}: {exc}")
        return EXIT_NEGATIVE
    except GroupoidError as exc:
        s.log.append_log(f"[ERROR] {job.command}: {exc}")
        return EXIT_INPUT
    s.log.append_log(f"[OK] {job.command} finished with exit {code}")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupoids", description="Finite groupoid calculus")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("inputs", nargs="+", help="input files")
        p.add_argument("--out", help="write a certificate or block to this path")
        p.add_argument("--seed", type=int, help="seed for sampled stack checks")
        p.add_argument("--max-size", type=int, help="guardrail on derived constructions")
        p.add_argument("--name", help="pick a named block instead of the first")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    job = Job(command=args.command, inputs=args.inputs, out=args.out, seed=args.seed,
              max_size=args.max_size, name=args.name)
    return run(job)
