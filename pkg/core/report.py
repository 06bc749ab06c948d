"""
Human-readable and JSON renderings of verdicts and cross-check reports.
"""

import json
from typing import Any, Dict, List, Optional

from core.crosscheck import ENGINE_ORDER, agreement_matrix, combined_status, engines_disagree
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    CONDITION_LABELS,
    CrosscheckReport,
    Mode,
    Status,
    Verdict,
)

logger = setup_logger(__name__)

MARKS = {Status.CERTIFIED: "[x]", Status.REFUTED: "[ ]", Status.INCONCLUSIVE: "[?]"}


# -----------------------------
# Text
# -----------------------------

def checklist_lines(verdict: Verdict) -> List[str]:
    """One labeled line per hypothesis, in the order the theorem states them."""
    lines = []
    for report in verdict.conditions:
        label = CONDITION_LABELS[report.condition]
        lines.append(f"  {MARKS[report.status]} {label}: {report.status.value}")
        for note in report.notes:
            lines.append(f"        note: {note}")
        if report.witness is not None and report.status is Status.REFUTED:
            w = report.witness
            lines.append(f"        witness ({w.kind.value}): {w.note}")
            for point in w.points[:4]:
                lines.append(f"          {_fmt_point(point)}")
            if len(w.points) > 4:
                lines.append(f"          ... {len(w.points) - 4} more points")
    return lines


def render_verdict(verdict: Verdict) -> str:
    out = [f"{verdict.mode.value}: {verdict.overall.value.upper()}"]
    out.extend(checklist_lines(verdict))
    for note in verdict.notes:
        out.append(f"  note: {note}")
    if verdict.elapsed_ms is not None:
        out.append(f"  elapsed: {verdict.elapsed_ms:.1f} ms")
    return "\n".join(out)


def render_verdicts(verdicts: Dict[Mode, Verdict]) -> str:
    blocks = [render_verdict(v) for v in verdicts.values()]
    if len(verdicts) > 1:
        statuses = [v.overall for v in verdicts.values()]
        summary = combined_status(statuses)
        agree = "disagree" if engines_disagree(statuses) else "agree"
        blocks.append(f"Epi f is strictly convex: {summary.value.upper()} (engines {agree})")
    return "\n\n".join(blocks)


def render_hull(hull: AffineSubspace) -> str:
    out = [f"dim: {hull.dim}", f"base: {_fmt_point(hull.base)}", "basis:"]
    for row in hull.basis:
        out.append(f"  {_fmt_point(row)}")
    return "\n".join(out)


def render_crosscheck(report: CrosscheckReport) -> str:
    header = f"{'entry':32} " + " ".join(f"{m.value:>13}" for m in ENGINE_ORDER) + "  expected      ok"
    out = [header, "-" * len(header)]
    for row in report.rows:
        cells = " ".join(f"{row.verdicts[m].overall.value:>13}" for m in ENGINE_ORDER if m in row.verdicts)
        flag = "ok" if row.expectation_met and not row.disagreement else "MISMATCH"
        out.append(f"{row.entry.name[:32]:32} {cells}  {row.entry.expected.value:12} {flag}")
    out.append("")
    out.append(
        f"{len(report.rows)} entries, {report.disagreements} disagreements, "
        f"{report.expectation_mismatches} expectation mismatches"
    )
    return "\n".join(out)


def _fmt_point(point) -> str:
    return "(" + ", ".join(f"{float(c):.6g}" for c in point) + ")"


# -----------------------------
# JSON
# -----------------------------

def verdict_to_dict(verdict: Verdict, k: int, trials: int, timing: bool = False) -> Dict[str, Any]:
    return {
        "verdict": verdict.overall.value,
        "mode": verdict.mode.value,
        "conditions": [
            {
                "id": report.condition.value,
                "status": report.status.value,
                "witness": report.witness.to_dict() if report.witness is not None else None,
                "samples": report.samples_used,
            }
            for report in verdict.conditions
        ],
        "agreement": None,
        "stats": {
            "seed": verdict.seed,
            "k": k,
            "trials": trials,
            "elapsed_ms": verdict.elapsed_ms if timing else None,
        },
    }


def verdicts_to_dict(verdicts: Dict[Mode, Verdict], k: int, trials: int, timing: bool = False) -> Dict[str, Any]:
    """Single engine: its verdict. Several: the combined verdict with each engine nested."""
    if len(verdicts) == 1:
        return verdict_to_dict(next(iter(verdicts.values())), k, trials, timing)

    statuses = [v.overall for v in verdicts.values()]
    engines = {mode.value: verdict_to_dict(v, k, trials, timing) for mode, v in verdicts.items()}
    first = next(iter(verdicts.values()))
    elapsed: Optional[float] = None
    if timing:
        elapsed = sum(v.elapsed_ms or 0.0 for v in verdicts.values())
    return {
        "verdict": combined_status(statuses).value,
        "mode": "all",
        "conditions": engines[Mode.MAIN_THEOREM.value]["conditions"] if Mode.MAIN_THEOREM.value in engines else [],
        "agreement": not engines_disagree(statuses),
        "engines": engines,
        "stats": {"seed": first.seed, "k": k, "trials": trials, "elapsed_ms": elapsed},
    }


def hull_to_dict(hull: AffineSubspace) -> Dict[str, Any]:
    return {"dim": hull.dim, "base": hull.base.tolist(), "basis": hull.basis.tolist()}


def crosscheck_to_dict(report: CrosscheckReport, k: int, trials: int) -> Dict[str, Any]:
    return {
        "verdict": Status.CERTIFIED.value if report.ok else Status.INCONCLUSIVE.value,
        "mode": "crosscheck",
        "entries": [
            {
                "name": row.entry.name,
                "id": row.entry.entry_id,
                "expected": row.entry.expected.value,
                "verdicts": {m.value: v.overall.value for m, v in row.verdicts.items()},
                "disagreement": row.disagreement,
                "expectation_met": row.expectation_met,
            }
            for row in report.rows
        ],
        "agreement": agreement_matrix(report),
        "stats": {
            "seed": report.seed,
            "k": k,
            "trials": trials,
            "disagreements": report.disagreements,
            "expectation_mismatches": report.expectation_mismatches,
        },
    }


def to_json(payload: Dict[str, Any]) -> str:
    """Sorted keys, fixed separators: identical runs give identical bytes."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default)


def _json_default(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "item"):
        return value.item()
    logger.warning(f"Unserializable value in report: {type(value).__name__}")
    return str(value)
