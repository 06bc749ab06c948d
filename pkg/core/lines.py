"""
Line-restriction engine: the epigraph is strictly convex iff every
restriction of f to a line slice C ∩ L has a strictly convex epigraph.
Each restriction is judged by the one-dimensional main theorem.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.boundary import ladder_along
from core.convexity import ball_oscillation, chord_probe, jump_refinement, undefined_witness
from core.domain import domain_hull, region_set, sample_domain
from core.functions import field_values
from core.geometry import relative_boundary_of_line_slice
from shared import config
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    ConditionId,
    ConditionReport,
    CONDITION_ORDER,
    DEFAULT_TOLERANCES,
    FunctionSpec,
    Mode,
    SliceResult,
    Status,
    Tolerances,
    Verdict,
    Witness,
    WitnessKind,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


@dataclass
class LineRestriction:
    """t -> f(base + t * direction) on the slice interval of C ∩ L."""
    spec: FunctionSpec
    line: AffineSubspace
    slice: SliceResult
    index: int = 0

    @property
    def direction(self) -> np.ndarray:
        return self.line.basis[0]

    def point(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.line.base[None, :] + t[:, None] * self.direction[None, :]

    def values(self, t) -> Tuple[np.ndarray, np.ndarray]:
        return field_values(self.spec.f, self.point(t))

    @property
    def interval(self) -> Tuple[float, float]:
        return self.slice.interval

    @property
    def degenerate(self) -> bool:
        lo, hi = self.interval
        return hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi))

    def describe(self) -> dict:
        return {
            "index": self.index,
            "base": self.line.base.tolist(),
            "direction": self.direction.tolist(),
            "interval": [float(t) for t in self.interval],
        }


def restrict_to_line(
    spec: FunctionSpec,
    base: np.ndarray,
    direction: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
    index: int = 0,
) -> Optional[LineRestriction]:
    """None when the line misses C inside the sampling box."""
    direction = np.asarray(direction, dtype=float)
    line = AffineSubspace(np.asarray(base, dtype=float), (direction / np.linalg.norm(direction))[None, :])
    slice_ = relative_boundary_of_line_slice(region_set(spec.domain, tol), line)
    if slice_.missed:
        return None
    return LineRestriction(spec, line, slice_, index)


# -----------------------------
# One-dimensional analyzer
# -----------------------------

def analyze_1d(
    restriction: LineRestriction,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Verdict:
    """
    Main theorem for n = 1: the slice is an open interval by construction
    (unless members reappear beyond an endpoint), then strict convexity on a
    parameter grid plus random pairs, oscillation and jump probes, and an
    approach ladder at each finite endpoint.
    """
    rng = make_rng(seed, "line", restriction.index)
    reports = {c: ConditionReport(c, Status.CERTIFIED) for c in CONDITION_ORDER}

    if restriction.degenerate:
        verdict = Verdict.from_conditions(list(reports.values()), Mode.LINES, seed, tol)
        verdict.notes.append("degenerate slice")
        verdict.stats = {"degenerate": True, "line": restriction.describe()}
        return verdict

    disconnected = _disconnected_witness(restriction, tol)
    if disconnected is not None:
        reports[ConditionId.DOMAIN_CONVEX_OPEN].status = Status.REFUTED
        reports[ConditionId.DOMAIN_CONVEX_OPEN].witness = disconnected

    lo, hi = restriction.interval
    grid_t = lo + (hi - lo) * (np.arange(config.LINE_GRID) + 0.5) / config.LINE_GRID
    points = restriction.point(grid_t)
    values, ok = field_values(restriction.spec.f, points)
    if not ok.all():
        witness = undefined_witness(points[int(np.argmin(ok))])
        for condition in (ConditionId.F_STRICTLY_CONVEX, ConditionId.F_CONTINUOUS):
            reports[condition].status = Status.REFUTED
            reports[condition].witness = witness
    else:
        _strict_convexity_1d(restriction, grid_t, points, values, rng, tol, reports[ConditionId.F_STRICTLY_CONVEX])
        _continuity_1d(restriction, points, values, rng, tol, reports[ConditionId.F_CONTINUOUS])

    _blowup_1d(restriction, tol, reports[ConditionId.BOUNDARY_BLOWUP])

    for report in reports.values():
        report.samples_used = int(grid_t.size)
    verdict = Verdict.from_conditions(list(reports.values()), Mode.LINES, seed, tol)
    verdict.stats = {"degenerate": False, "line": restriction.describe()}
    return verdict


def _disconnected_witness(restriction: LineRestriction, tol: Tolerances) -> Optional[Witness]:
    """Members of C ∩ L beyond a finite slice endpoint make the slice disconnected."""
    s = restriction.slice
    ts = np.linspace(s.window[0], s.window[1], config.LINE_MEMBER_SCAN)
    members = region_set(restriction.spec.domain, tol).contains_many(restriction.point(ts))

    if s.upper is not None:
        hits = np.flatnonzero(members & (ts > s.upper))
        if hits.size:
            return _gap_witness(restriction, s.upper, ts[hits[0]], tol)
    if s.lower is not None:
        hits = np.flatnonzero(members & (ts < s.lower))
        if hits.size:
            return _gap_witness(restriction, s.lower, ts[hits[-1]], tol)
    return None


def _gap_witness(restriction: LineRestriction, t_end: float, t_far: float, tol: Tolerances) -> Witness:
    t0 = restriction.slice.member_parameter
    fraction = (t_end - t0) / (t_far - t0)
    a, b, gap = restriction.point([t0, t_far, t_end])
    return Witness(
        kind=WitnessKind.NONCONVEX_DOMAIN,
        points=[a.tolist(), b.tolist(), gap.tolist()],
        values=[float(fraction)],
        tolerance=tol.strict,
        note="the line slice of C is disconnected",
    )


def _strict_convexity_1d(restriction, grid_t, points, values, rng, tol, report: ConditionReport) -> None:
    a, b = np.triu_indices(grid_t.size, k=1)
    lo, hi = restriction.interval
    t_random = rng.uniform(lo, hi, size=(config.LINE_RANDOM_PAIRS, 2))
    t_random = t_random[np.abs(t_random[:, 0] - t_random[:, 1]) >= config.MIN_PAIR_SEPARATION * (hi - lo)]
    x_random, y_random = restriction.point(t_random[:, 0]), restriction.point(t_random[:, 1])
    fx_random, okx = restriction.values(t_random[:, 0])
    fy_random, oky = restriction.values(t_random[:, 1])
    keep = okx & oky

    x = np.vstack([points[a], x_random[keep]])
    y = np.vstack([points[b], y_random[keep]])
    fx = np.concatenate([values[a], fx_random[keep]])
    fy = np.concatenate([values[b], fy_random[keep]])
    witness, stats = chord_probe(restriction.spec, x, y, fx, fy, tol)
    report.certificates.append(stats)
    if witness is not None:
        report.status = Status.REFUTED
        report.witness = witness


def _continuity_1d(restriction, points, values, rng, tol, report: ConditionReport) -> None:
    basis = restriction.direction[None, :]
    witness = ball_oscillation(restriction.spec, points, values, basis, rng, tol, report)
    if witness is None:
        witness = jump_refinement(restriction.spec, points, rng, tol)
    if witness is not None:
        report.status = Status.REFUTED
        report.witness = witness


def _blowup_1d(restriction: LineRestriction, tol: Tolerances, report: ConditionReport) -> None:
    s = restriction.slice
    t0 = s.member_parameter
    d = restriction.direction
    ends = []
    if s.upper is not None:
        ends.append((s.upper, d, s.upper - t0))
    if s.lower is not None:
        ends.append((s.lower, -d, t0 - s.lower))
    if not ends:
        report.notes.append("unbounded slice (vacuous)")
        return

    statuses = []
    for t_end, towards, reach in ends:
        outcome = ladder_along(restriction.spec, restriction.point(t_end)[0], towards, reach, tol)
        statuses.append(outcome.status)
        if outcome.status is Status.REFUTED and report.witness is None:
            report.witness = outcome.witness(tol)
    report.status = Status.combine(statuses)
    if report.status is not Status.REFUTED:
        report.witness = None


# -----------------------------
# Line sampling and aggregation
# -----------------------------

def sample_lines(
    spec: FunctionSpec,
    m_lines: int,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[List[Tuple[np.ndarray, np.ndarray]], int]:
    """
    m_lines lines through random member pairs, then the hull's axis lines
    through two random members. Returns (base, direction) pairs and the
    number of coincident pairs dropped.
    """
    points = sample_domain(spec.domain, max(2, k), seed, tol).points
    rng = make_rng(seed, "lines")
    lines, dropped = [], 0

    i = rng.integers(0, points.shape[0], size=m_lines)
    j = rng.integers(0, points.shape[0], size=m_lines)
    for a, b in zip(i, j):
        direction = points[b] - points[a]
        if np.linalg.norm(direction) <= 1e-12:
            dropped += 1
            continue
        lines.append((points[a], direction))

    hull = domain_hull(spec.domain)
    for a in rng.choice(points.shape[0], size=min(2, points.shape[0]), replace=False):
        for axis in hull.basis:
            lines.append((points[a], axis))
    return lines, dropped


def line_restriction_verdict(
    spec: FunctionSpec,
    m_lines: int = config.DEFAULT_LINES,
    k: int = config.DEFAULT_SAMPLES,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    workers: int = 1,
) -> Verdict:
    """
    Certified iff every line verdict is Certified; a Refuted line is
    recorded with its base, direction and interval. Lines are independent,
    so `workers > 1` runs them in a thread pool with identical results.
    """
    lines, dropped = sample_lines(spec, m_lines, k, seed, tol)

    def run(indexed):
        index, (base, direction) = indexed
        restriction = restrict_to_line(spec, base, direction, tol, index)
        if restriction is None:
            return None
        return analyze_1d(restriction, seed, tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, enumerate(lines)))
    else:
        results = [run(item) for item in enumerate(lines)]

    verdicts = [v for v in results if v is not None]
    skipped = len(results) - len(verdicts) + dropped
    if skipped:
        logger.warning(f"Line engine skipped {skipped} lines missing the domain")

    conditions = []
    for condition in CONDITION_ORDER:
        per_line = [v.condition(condition) for v in verdicts]
        report = ConditionReport(
            condition,
            Status.combine([r.status for r in per_line]) if per_line else Status.INCONCLUSIVE,
            samples_used=len(per_line),
        )
        for verdict, line_report in zip(verdicts, per_line):
            if line_report.status is Status.REFUTED:
                report.witness = line_report.witness
                report.notes.append(f"refuted on line {verdict.stats['line']}")
                break
        conditions.append(report)

    verdict = Verdict.from_conditions(conditions, Mode.LINES, seed, tol)
    verdict.stats = {
        "lines": len(lines),
        "analyzed": len(verdicts),
        "skipped": skipped,
        "degenerate": sum(1 for v in verdicts if v.stats.get("degenerate")),
    }
    logger.info(
        f"Line restriction verdict: {verdict.overall.value} "
        f"({len(verdicts)} lines analyzed, {skipped} skipped)"
    )
    return verdict
