"""
Corpus cross-validation: the analytic engine, the line engine and the
epigraph oracle must agree on every entry.
"""

from typing import Callable, Dict, List, Sequence

from core.convexity import main_theorem_verdict
from core.lines import line_restriction_verdict
from core.oracle import oracle_epigraph_strict_convexity
from shared import config
from shared.logger import setup_logger
from shared.models import (
    ConditionId,
    ConditionReport,
    CorpusEntry,
    CrosscheckReport,
    CrosscheckRow,
    DEFAULT_TOLERANCES,
    FunctionSpec,
    Mode,
    Status,
    Tolerances,
    Verdict,
)
from shared.seeding import derive_seed

logger = setup_logger(__name__)

ENGINE_ORDER = (Mode.MAIN_THEOREM, Mode.LINES, Mode.ORACLE)


def run_engines(
    spec: FunctionSpec,
    k: int = config.DEFAULT_SAMPLES,
    m_lines: int = config.DEFAULT_LINES,
    trials: int = config.DEFAULT_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    workers: int = 1,
    modes: Sequence[Mode] = ENGINE_ORDER,
) -> Dict[Mode, Verdict]:
    engines: Dict[Mode, Callable[[], Verdict]] = {
        Mode.MAIN_THEOREM: lambda: main_theorem_verdict(spec, k, seed, tol),
        Mode.LINES: lambda: line_restriction_verdict(spec, m_lines, k, seed, tol, workers),
        Mode.ORACLE: lambda: oracle_epigraph_strict_convexity(spec, trials, seed, tol),
    }
    return {mode: engines[mode]() for mode in modes}


def engines_disagree(statuses: Sequence[Status]) -> bool:
    """Two engines disagree when both are decided and differ."""
    decided = {s for s in statuses if s is not Status.INCONCLUSIVE}
    return len(decided) > 1


def combined_status(statuses: Sequence[Status]) -> Status:
    """A decided verdict only when every engine returns it."""
    statuses = list(statuses)
    if statuses and all(s is statuses[0] for s in statuses) and statuses[0] is not Status.INCONCLUSIVE:
        return statuses[0]
    return Status.INCONCLUSIVE


def expectation_met(entry: CorpusEntry, verdicts: Dict[Mode, Verdict]) -> bool:
    if any(v.overall is not entry.expected for v in verdicts.values()):
        return False
    main = verdicts.get(Mode.MAIN_THEOREM)
    if entry.expected_failing is not None and main is not None:
        return main.first_failing is entry.expected_failing
    return True


def _failed_verdict(mode: Mode, seed: int, tol: Tolerances, error: Exception) -> Verdict:
    report = ConditionReport(ConditionId.EPIGRAPH_STRICTLY_CONVEX, Status.INCONCLUSIVE)
    report.notes.append(f"engine failed: {error}")
    return Verdict.from_conditions([report], mode, seed, tol)


def crosscheck(
    corpus: List[CorpusEntry],
    k: int = config.DEFAULT_SAMPLES,
    trials: int = config.DEFAULT_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    m_lines: int = config.DEFAULT_LINES,
    workers: int = 1,
) -> CrosscheckReport:
    """
    Runs all three engines per entry with a seed derived from the entry id,
    so entries can be reordered without changing their verdicts.
    """
    rows: List[CrosscheckRow] = []

    for entry in corpus:
        entry_seed = derive_seed(seed, entry.entry_id or entry.name)
        verdicts: Dict[Mode, Verdict] = {}
        for mode in ENGINE_ORDER:
            try:
                verdicts.update(run_engines(entry.spec, k, m_lines, trials, entry_seed, tol, workers, (mode,)))
            except Exception as e:
                logger.exception(f"{mode.value} engine failed on corpus entry {entry.name}: {e}")
                verdicts[mode] = _failed_verdict(mode, entry_seed, tol, e)

        row = CrosscheckRow(
            entry=entry,
            verdicts=verdicts,
            disagreement=engines_disagree([v.overall for v in verdicts.values()]),
            expectation_met=expectation_met(entry, verdicts),
        )
        rows.append(row)
        logger.info(
            f"Crosscheck {entry.name}: "
            + ", ".join(f"{m.value}={v.overall.value}" for m, v in verdicts.items())
        )

    report = CrosscheckReport(rows=rows, seed=seed)
    if report.disagreements:
        logger.warning(f"Crosscheck found {report.disagreements} disagreements")
    if report.expectation_mismatches:
        logger.warning(f"Crosscheck found {report.expectation_mismatches} expectation mismatches")
    return report


def agreement_matrix(report: CrosscheckReport) -> Dict[str, Dict[str, int]]:
    """Pairwise counts of entries on which two engines return the same verdict."""
    matrix: Dict[str, Dict[str, int]] = {}
    for a in ENGINE_ORDER:
        matrix[a.value] = {}
        for b in ENGINE_ORDER:
            matrix[a.value][b.value] = sum(
                1
                for row in report.rows
                if a in row.verdicts and b in row.verdicts
                and row.verdicts[a].overall is row.verdicts[b].overall
            )
    return matrix
