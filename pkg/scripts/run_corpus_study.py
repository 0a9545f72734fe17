"""Run every corpus example through the engine and tabulate verdicts and timings."""
import argparse
import os
import sys
import time
from datetime import datetime

import pandas as pd
from tqdm import tqdm

# Add parent directory to path to import modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src import corpus
from src.actions import check_two_group_semidirect
from src.bibundle import decide_weak_equivalence, search_equivalence_functor
from src.charted import effectivization, is_effective, is_purely_ineffective, validate_charted
from src.descent import check_stack_property, cocycle_to_bundle, part_constant_trivialization
from src.errors import GroupoidError, Refusal
from src.groupoid import b_group
from src.groups import cyclic_group
from src.presentation import present
from src.run_orchestrator import RunOrchestrator

# the functor search is brute force; only small pairs are cross-checked
ORACLE_ARROWS = 12


def timed(fn, *args):
    """Run fn and return (result, seconds, error text)."""
    start = time.perf_counter()
    try:
        result, error = fn(*args), None
    except Refusal as e:
        result, error = None, f"refused: {e}"
    except GroupoidError as e:
        result, error = None, f"error: {e}"
    return result, time.perf_counter() - start, error


def charted_rows(name, g):
    rows = []
    report, secs, err = timed(validate_charted, g)
    rows.append({"example": name, "check": "validate", "ok": bool(report and report.ok),
                 "seconds": secs, "note": err or ""})

    eff, secs, err = timed(effectivization, g)
    rows.append({"example": name, "check": "effectivize", "ok": eff is not None and is_effective(eff[0]),
                 "seconds": secs, "note": err or f"purely ineffective: {is_purely_ineffective(g)}"})

    cert, secs, err = timed(present, g)
    if cert is None:
        note = err
    elif cert.verified:
        note = f"|K|={cert.structure_group.order} |Z|={cert.band_center.order}"
    else:
        note = f"stopped at {cert.stage}"
    rows.append({"example": name, "check": "present", "ok": bool(cert and cert.verified),
                 "seconds": secs, "note": note})
    return rows


def equivalence_rows(examples):
    rows = []
    names = sorted(examples)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            w, secs, err = timed(decide_weak_equivalence, examples[a], examples[b], False)
            rows.append({"example": f"{a} ~ {b}", "check": "equiv", "ok": bool(w and w.equivalent),
                         "seconds": secs, "note": err or w.report.reason})
            if w is None or max(examples[a].n_arrows, examples[b].n_arrows) > ORACLE_ARROWS:
                continue
            phi, secs, err = timed(search_equivalence_functor, examples[a], examples[b])
            rows.append({"example": f"{a} ~ {b}", "check": "equiv oracle",
                         "ok": err is None and (phi is not None) == w.equivalent, "seconds": secs,
                         "note": err or ("functor found" if phi is not None else "no functor")})
    return rows


def family_rows():
    rows = []
    for name, (g, stabilizer) in corpus.coset_translations().items():
        w, secs, err = timed(decide_weak_equivalence, g, b_group(stabilizer), False)
        rows.append({"example": f"{name} ~ B({stabilizer.name})", "check": "coset translation",
                     "ok": bool(w and w.equivalent), "seconds": secs, "note": err or w.report.reason})
    for name, (first, second) in corpus.commuting_action_pairs().items():
        result, secs, err = timed(check_two_group_semidirect, first, second)
        rows.append({"example": name, "check": "two-group semidirect", "ok": bool(result and result.verified),
                     "seconds": secs, "note": err or f"{result.combined.n_arrows} arrows"})
    return rows


def descent_rows(seed):
    rows = []
    for name, build in (("mobius", corpus.mobius_cocycle), ("cylinder", corpus.cylinder_cocycle)):
        cover, group, k = build()
        section, secs, err = timed(part_constant_trivialization, cover, group, k)
        rows.append({"example": name, "check": "part-constant section", "ok": section is not None,
                     "seconds": secs, "note": err or ""})
        psi, secs, err = timed(cocycle_to_bundle, cover, group, k)
        rows.append({"example": name, "check": "glue", "ok": psi is not None,
                     "seconds": secs, "note": err or f"{len(psi)} points"})
    for cover in (corpus.circle_cover(), corpus.interval_cover()):
        target = b_group(cyclic_group(2))
        report, secs, err = timed(check_stack_property, cover, target, None, seed)
        rows.append({"example": f"{cover.name} -> {target.name}", "check": "stack", "ok": bool(report and report.ok),
                     "seconds": secs,
                     "note": err or f"data {report.data_checked}, 2-isos {report.two_isos_matched}"})
    return rows


def summarize(df: pd.DataFrame) -> dict:
    by_check = df.groupby("check").agg(runs=("ok", "size"), passed=("ok", "sum"), seconds=("seconds", "sum"))
    return {
        "rows": int(len(df)),
        "passed": int(df["ok"].sum()),
        "by_check": {check: {"runs": int(r.runs), "passed": int(r.passed), "seconds": round(float(r.seconds), 4)}
                     for check, r in by_check.iterrows()},
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument('run_id', nargs='?', default=datetime.now().strftime("%Y%m%d_%H%M%S"))
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()

    charted = {name: build() for name, build in corpus.CHARTED.items()}
    charted.update(corpus.charted_family())

    orchestrator = RunOrchestrator(args.run_id)
    orchestrator.write_status("corpus", {"done": 0, "total": len(charted), "current": None,
                                         "message": "Starting corpus study..."})
    orchestrator.append_log(f"Corpus study {args.run_id} started")

    rows = []
    for i, (name, g) in enumerate(tqdm(sorted(charted.items()), desc="Charted examples")):
        rows.extend(charted_rows(name, g))
        orchestrator.write_status("corpus", {"done": i + 1, "total": len(charted), "current": name,
                                             "message": f"Presented {name}"})

    examples = {name: build().base for name, build in corpus.CHARTED.items()}
    examples.update({name: build() for name, build in corpus.GROUPOIDS.items()})
    examples.update(corpus.small_groupoids())
    orchestrator.append_log(f"Deciding equivalence for {len(examples)} groupoids")
    rows.extend(equivalence_rows(examples))

    orchestrator.append_log("Checking generated families")
    rows.extend(family_rows())

    orchestrator.append_log("Running descent checks")
    rows.extend(descent_rows(args.seed))

    df = pd.DataFrame(rows, columns=["example", "check", "ok", "seconds", "note"])
    csv_path = orchestrator.path("corpus_study.csv")
    df.to_csv(csv_path, index=False)
    summary = summarize(df)
    orchestrator.write_json("corpus_summary.json", summary)
    orchestrator.write_status("done", {"done": len(charted), "total": len(charted),
                                       "current": None, "message": "Corpus study complete"})
    orchestrator.append_log(f"[OK] {summary['passed']}/{summary['rows']} checks passed, results in {csv_path}")


if __name__ == '__main__':
    main()
