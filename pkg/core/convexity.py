"""
Analytic verdict engine.

The main theorem's hypotheses, checked on a shared sample of domain members:

    C is convex and open in Aff(C)
    f is strictly convex and continuous
    f(x) -> +inf at every relative-boundary point of C

Certified always means sampled certification. Refuted reports carry a
witness that core.witness can replay.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from core.boundary import approach_ladders, cast_boundary_rays
from core.differentiation import hessian_in_subspace
from core.domain import domain_hull, member_mask, region_mask, region_set, sample_domain
from core.functions import field_values, is_expression
from core.geometry import (
    CERTIFIED,
    REFUTED,
    affine_hull,
    probe_directions,
    random_directions,
    relative_interior_codes,
)
from shared import config
from shared.errors import EvaluationDomainError, InputError, RegionTooThinError
from shared.logger import setup_logger
from shared.models import (
    ConditionId,
    ConditionReport,
    DEFAULT_TOLERANCES,
    DomainSpec,
    FunctionSpec,
    Mode,
    PointCloud,
    Status,
    Tolerances,
    Verdict,
    Witness,
    WitnessKind,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


# -----------------------------
# Shared helpers
# -----------------------------

def value_scale(values) -> np.ndarray:
    return np.maximum(1.0, np.abs(values))


def sample_diameter(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def collinear_params() -> np.ndarray:
    return np.arange(1, config.COLLINEAR_PROBES + 1) / (config.COLLINEAR_PROBES + 1)


def draw_pairs(
    rng: np.random.Generator,
    points: np.ndarray,
    count: int,
    min_separation: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j), i != j, at least `min_separation` apart."""
    m = points.shape[0]
    if m < 2 or count < 1:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    i = rng.integers(0, m, size=count)
    j = rng.integers(0, m, size=count)
    keep = i != j
    if min_separation > 0:
        keep &= np.linalg.norm(points[i] - points[j], axis=1) >= min_separation
    return i[keep], j[keep]


def undefined_witness(point: np.ndarray) -> Witness:
    return Witness(
        kind=WitnessKind.DISCONTINUITY,
        points=[np.asarray(point).tolist()],
        values=[],
        note="f cannot be evaluated at a domain member",
    )


def flat_segment_witness(
    spec: FunctionSpec,
    x: np.ndarray,
    y: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[Witness]:
    """
    Collinear chord test: f agrees with its chord within tol_eq at every
    interior probe of [x, y]. Returns the strictness witness or None.
    """
    params = collinear_params()
    ends, ok_ends = field_values(spec.f, np.vstack([x, y]))
    inner = (1.0 - params)[:, None] * x[None, :] + params[:, None] * y[None, :]
    values, ok = field_values(spec.f, inner)
    if not (ok_ends.all() and ok.all() and member_mask(spec.domain, inner, tol).all()):
        return None

    chord = (1.0 - params) * ends[0] + params * ends[1]
    if not np.all(np.abs(values - chord) <= tol.eq * value_scale(chord)):
        return None
    return Witness(
        kind=WitnessKind.MIDPOINT_VIOLATION,
        points=[x.tolist(), y.tolist()] + inner.tolist(),
        values=params.tolist(),
        tolerance=tol.eq,
        note="f is affine along the segment",
        breaks_convexity=False,
    )


def convexity_break_witness(x, y, z, t: float, excess: float, tol: Tolerances) -> Witness:
    return Witness(
        kind=WitnessKind.MIDPOINT_VIOLATION,
        points=[np.asarray(x).tolist(), np.asarray(y).tolist(), np.asarray(z).tolist()],
        values=[float(t)],
        tolerance=tol.eq,
        note=f"f exceeds its chord by {excess:.6g}",
        breaks_convexity=True,
    )


# -----------------------------
# C convex and open in Aff(C)
# -----------------------------

def check_domain_convex_open(
    domain: DomainSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: Optional[PointCloud] = None,
) -> ConditionReport:
    """
    Convexity: k random member pairs, 5 interior parameters each.
    Openness: relative-interior probes at k/10 members, within the hull
    estimated from the samples.
    """
    cloud = samples if samples is not None else sample_domain(domain, k, seed, tol)
    points = cloud.points
    n = domain.ambient_dim
    report = ConditionReport(ConditionId.DOMAIN_CONVEX_OPEN, Status.CERTIFIED, samples_used=len(cloud))

    rng = make_rng(seed, "domain_convex")
    i, j = draw_pairs(rng, points, k)
    params = np.asarray(config.DOMAIN_CONVEXITY_PARAMS)
    if i.size:
        x, y = points[i], points[j]
        combos = (1.0 - params)[None, :, None] * x[:, None, :] + params[None, :, None] * y[:, None, :]
        inside = region_mask(domain, combos.reshape(-1, n), tol).reshape(i.size, params.size)
        bad = np.argwhere(~inside)
        if bad.size:
            p, q = bad[0]
            report.status = Status.REFUTED
            report.witness = Witness(
                kind=WitnessKind.NONCONVEX_DOMAIN,
                points=[x[p].tolist(), y[p].tolist(), combos[p, q].tolist()],
                values=[float(params[q])],
                tolerance=tol.strict,
                note="a convex combination of two members leaves C",
            )
            logger.info(f"Domain convexity refuted after {i.size} pairs")
            return report

    hull = affine_hull(cloud, tol)
    declared = domain_hull(domain)
    if hull.dim != declared.dim:
        report.notes.append(f"sampled hull has dim {hull.dim}, declared Aff(C) has dim {declared.dim}")
        logger.warning(f"Sampled hull dim {hull.dim} differs from declared dim {declared.dim}")

    count = max(1, k // 10)
    body = region_set(domain, tol, hull)
    codes = relative_interior_codes(points[:count], body, tol, seed)
    if np.any(codes == REFUTED):
        v = points[int(np.argmax(codes == REFUTED))]
        report.status = Status.REFUTED
        report.witness = _openness_witness(v, body, tol, seed)
        logger.info("Domain openness refuted")
        return report
    if np.any(codes != CERTIFIED):
        report.status = Status.INCONCLUSIVE
        report.notes.append("some sampled members could not be certified relatively interior")

    report.certificates.append({
        "pairs": int(i.size),
        "parameters": int(params.size),
        "interior_probes": count,
        "hull_dim": hull.dim,
    })
    logger.info(f"Domain check: {report.status.value} ({i.size} pairs, {count} interior probes, hull dim {hull.dim})")
    return report


def _openness_witness(v: np.ndarray, body, tol: Tolerances, seed: int) -> Witness:
    step = tol.probe_ladder[-1]
    for d in probe_directions(body.hull, seed):
        path = v[None, :] + np.array(tol.probe_ladder)[:, None] * d[None, :]
        if not body.contains_many(path).any():
            return Witness(
                kind=WitnessKind.NONCONVEX_DOMAIN,
                points=[v.tolist(), (v + step * d).tolist()],
                values=[step],
                tolerance=tol.strict,
                note="C is not open in Aff(C) at the first point",
            )
    return Witness(
        kind=WitnessKind.NONCONVEX_DOMAIN,
        points=[v.tolist()],
        values=[],
        tolerance=tol.strict,
        note="sampled point fails domain membership",
    )


# -----------------------------
# f strictly convex
# -----------------------------

def check_strict_convexity(
    spec: FunctionSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: Optional[PointCloud] = None,
) -> ConditionReport:
    """
    (a) chord probe on k separated pairs at t = 0.25, 0.5, 0.75 with the
        strictness gap tol_sc * t(1-t)|x-y|^2;
    (b) Hessian probe within Aff(C) at k/10 members for expressions.
    Near-equalities are only refuted after the collinear chord test.
    """
    cloud = samples if samples is not None else sample_domain(spec.domain, k, seed, tol)
    points = cloud.points
    report = ConditionReport(ConditionId.F_STRICTLY_CONVEX, Status.CERTIFIED, samples_used=len(cloud))

    values, ok = field_values(spec.f, points)
    if not ok.all():
        report.status = Status.REFUTED
        report.witness = undefined_witness(points[int(np.argmin(ok))])
        return report

    rng = make_rng(seed, "strict_convexity")
    diameter = sample_diameter(points) or spec.domain.diameter
    i, j = draw_pairs(rng, points, k, config.MIN_PAIR_SEPARATION * sample_diameter(points))

    witness, chord_stats = chord_probe(spec, points[i], points[j], values[i], values[j], tol)
    report.certificates.append(chord_stats)
    if witness is not None:
        report.status = Status.REFUTED
        report.witness = witness
        logger.info(f"Strict convexity refuted by the chord probe ({witness.note})")
        return report

    if is_expression(spec.f):
        count = max(1, k // 10)
        witness, hessian_stats = _hessian_probe(spec, points[:count], rng, diameter, tol)
        report.certificates.append(hessian_stats)
        if witness is not None:
            report.status = Status.REFUTED
            report.witness = witness
            logger.info(f"Strict convexity refuted by the Hessian probe ({witness.note})")
            return report
        if hessian_stats["negative_unconfirmed"]:
            report.status = Status.INCONCLUSIVE
            report.notes.append("negative Hessian eigenvalue without a chord witness")
        elif hessian_stats["evaluated"] and not hessian_stats["positive_directions"]:
            report.status = Status.INCONCLUSIVE
            report.notes.append("no strictly positive curvature direction found")
    else:
        report.notes.append("Hessian probe skipped for a non-expression field")

    logger.info(f"Strict convexity check: {report.status.value} ({i.size} pairs)")
    return report


def chord_probe(
    spec: FunctionSpec,
    x: np.ndarray,
    y: np.ndarray,
    fx: np.ndarray,
    fy: np.ndarray,
    tol: Tolerances,
) -> Tuple[Optional[Witness], Dict]:
    params = np.asarray(config.STRICT_CONVEXITY_PARAMS)
    stats = {"pairs": int(x.shape[0]), "parameters": int(params.size), "flat_candidates": 0}
    if x.shape[0] == 0:
        return None, stats

    p, n = x.shape
    z = (1.0 - params)[None, :, None] * x[:, None, :] + params[None, :, None] * y[:, None, :]
    flat = z.reshape(-1, n)
    fz, okz = field_values(spec.f, flat)
    inside = region_mask(spec.domain, flat, tol)
    undefined = inside & ~okz
    if undefined.any():
        return undefined_witness(flat[int(np.argmax(undefined))]), stats

    fz = fz.reshape(p, params.size)
    usable = (inside & okz).reshape(p, params.size)
    chord = (1.0 - params)[None, :] * fx[:, None] + params[None, :] * fy[:, None]
    slack = tol.eq * value_scale(chord)
    gap = tol.sc * (params * (1.0 - params))[None, :] * np.sum((x - y) ** 2, axis=1)[:, None]
    excess = np.where(usable, fz - chord, -np.inf)

    broken = excess > slack
    if broken.any():
        a, b = np.unravel_index(int(np.argmax(np.where(broken, excess / slack, -np.inf))), broken.shape)
        return convexity_break_witness(x[a], y[a], z[a, b], params[b], float(excess[a, b]), tol), stats

    near = (excess > -(gap + slack)).any(axis=1)
    stats["flat_candidates"] = int(near.sum())
    for a in np.flatnonzero(near):
        witness = flat_segment_witness(spec, x[a], y[a], tol)
        if witness is not None:
            return witness, stats
    return None, stats


def _chord_spans(domain: DomainSpec, x: np.ndarray, v: np.ndarray, diameter: float, tol: Tolerances) -> List[float]:
    """Half-lengths h, largest first, with x +- h v both members."""
    spans = []
    for fraction in (0.25, 0.1, 1e-2, 1e-3, 1e-4):
        h = fraction * diameter
        ends = np.vstack([x - h * v, x + h * v])
        if member_mask(domain, ends, tol).all():
            spans.append(h)
    return spans


def _hessian_probe(
    spec: FunctionSpec,
    points: np.ndarray,
    rng: np.random.Generator,
    diameter: float,
    tol: Tolerances,
) -> Tuple[Optional[Witness], Dict]:
    hull = domain_hull(spec.domain)
    stats = {
        "evaluated": 0,
        "skipped": 0,
        "positive_directions": 0,
        "flat_directions": 0,
        "negative_unconfirmed": 0,
    }
    if hull.dim == 0:
        return None, stats

    for x in points:
        try:
            eigenvalues, eigenvectors = hessian_in_subspace(spec.f, x, hull.basis)
        except EvaluationDomainError:
            stats["skipped"] += 1
            continue
        stats["evaluated"] += 1

        scale = max(1.0, float(np.max(np.abs(eigenvalues))))
        coeffs = rng.standard_normal(hull.dim)
        coeffs /= np.linalg.norm(coeffs)
        curvature = float(np.sum(eigenvalues * (eigenvectors.T @ coeffs) ** 2))
        if curvature > tol.psd * scale:
            stats["positive_directions"] += 1

        lowest = float(eigenvalues[0])
        v = eigenvectors[:, 0] @ hull.basis
        if lowest < -tol.psd * scale:
            witness = _concave_chord(spec, x, v, diameter, tol)
            if witness is not None:
                return witness, stats
            stats["negative_unconfirmed"] += 1
        elif lowest <= tol.psd * scale:
            stats["flat_directions"] += 1
            spans = _chord_spans(spec.domain, x, v, diameter, tol)
            if spans:
                witness = flat_segment_witness(spec, x - spans[0] * v, x + spans[0] * v, tol)
                if witness is not None:
                    return witness, stats

    if stats["skipped"]:
        logger.warning(f"Hessian unavailable at {stats['skipped']} sampled points")
    return None, stats


def _concave_chord(spec: FunctionSpec, x: np.ndarray, v: np.ndarray, diameter: float, tol: Tolerances) -> Optional[Witness]:
    for h in _chord_spans(spec.domain, x, v, diameter, tol):
        a, b = x - h * v, x + h * v
        values, ok = field_values(spec.f, np.vstack([a, b, x]))
        if not ok.all():
            continue
        chord = 0.5 * (values[0] + values[1])
        excess = values[2] - chord
        if excess > tol.eq * max(1.0, abs(chord)):
            return convexity_break_witness(a, b, x, 0.5, float(excess), tol)
    return None


# -----------------------------
# f continuous
# -----------------------------

def check_continuity(
    spec: FunctionSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: Optional[PointCloud] = None,
) -> ConditionReport:
    """
    Shrinking-ball oscillation test at every sampled member, using the same
    directions at every radius, plus jump refinement along segments. Local
    upper bounds are recorded as certificates (ball center, radius, bound).
    """
    cloud = samples if samples is not None else sample_domain(spec.domain, k, seed, tol)
    points = cloud.points
    report = ConditionReport(ConditionId.F_CONTINUOUS, Status.CERTIFIED, samples_used=len(cloud))
    report.notes.append("continuity is certified on the sampled region only")

    values, ok = field_values(spec.f, points)
    if not ok.all():
        report.status = Status.REFUTED
        report.witness = undefined_witness(points[int(np.argmin(ok))])
        return report

    hull = domain_hull(spec.domain)
    if hull.dim == 0:
        return report

    rng = make_rng(seed, "continuity")
    witness = ball_oscillation(spec, points, values, hull.basis, rng, tol, report)
    if witness is None:
        witness = jump_refinement(spec, points, rng, tol)
    if witness is not None:
        report.status = Status.REFUTED
        report.witness = witness
        logger.info(f"Continuity refuted ({witness.note})")
        return report

    logger.info(f"Continuity check: certified at {len(cloud)} samples")
    return report


def ball_oscillation(
    spec: FunctionSpec,
    points: np.ndarray,
    values: np.ndarray,
    basis: np.ndarray,
    rng: np.random.Generator,
    tol: Tolerances,
    report: ConditionReport,
) -> Optional[Witness]:
    m, n = points.shape
    half = max(1, config.CONTINUITY_BALL_POINTS // 2)
    directions = random_directions(basis, m * half, rng).reshape(m, half, n)
    directions = np.concatenate([directions, -directions], axis=1)
    radii = np.asarray(config.CONTINUITY_RADII)
    b = directions.shape[1]

    ball = points[:, None, None, :] + radii[None, :, None, None] * directions[:, None, :, :]
    flat = ball.reshape(-1, n)
    fb, okb = field_values(spec.f, flat)
    inside = member_mask(spec.domain, flat, tol)
    undefined = inside & ~okb
    if undefined.any():
        return undefined_witness(flat[int(np.argmax(undefined))])

    fb = fb.reshape(m, radii.size, b)
    # a direction counts only if it stays inside at every radius
    valid = (inside & okb).reshape(m, radii.size, b).all(axis=1)
    deviation = np.where(valid[:, None, :], np.abs(fb - values[:, None, None]), 0.0)
    oscillation = deviation.max(axis=2)
    usable = valid.any(axis=1)

    slack = tol.eq * value_scale(values)
    fails = usable[:, None] & (
        oscillation[:, 1:] > config.CONTINUITY_RATIO * oscillation[:, :-1] + slack[:, None]
    )

    for s in range(min(5, m)):
        if usable[s]:
            bound = float(max(values[s], np.max(np.where(valid[s], fb[s, 0], -np.inf))))
            report.certificates.append({
                "center": points[s].tolist(),
                "radius": float(radii[0]),
                "bound": bound,
            })
    if not usable.all():
        report.notes.append(f"{int((~usable).sum())} samples too close to rb(C) for ball probes")

    bad = np.flatnonzero(fails.any(axis=1))
    if bad.size == 0:
        return None

    s = int(bad[0])
    step = int(np.argmax(fails[s]))
    pairs, jumps = [], []
    for r in (step, step + 1):
        q = int(np.argmax(deviation[s, r]))
        pairs += [points[s].tolist(), ball[s, r, q].tolist()]
        jumps.append(float(deviation[s, r, q]))
    return Witness(
        kind=WitnessKind.DISCONTINUITY,
        points=pairs,
        values=jumps,
        tolerance=0.5 * min(jumps),
        note=f"oscillation does not shrink with the radius at sample {s}",
    )


def jump_refinement(
    spec: FunctionSpec,
    points: np.ndarray,
    rng: np.random.Generator,
    tol: Tolerances,
) -> Optional[Witness]:
    """Bisects the largest grid jumps along member segments."""
    i, j = draw_pairs(rng, points, config.JUMP_SEGMENTS)
    if i.size == 0:
        return None

    a, b = points[i], points[j]
    s, n = a.shape
    ts = np.linspace(0.0, 1.0, config.JUMP_GRID + 1)
    grid = (1.0 - ts)[None, :, None] * a[:, None, :] + ts[None, :, None] * b[:, None, :]
    flat = grid.reshape(-1, n)
    values, ok = field_values(spec.f, flat)
    inside = member_mask(spec.domain, flat, tol)
    values = values.reshape(s, ts.size)
    usable = (ok & inside).reshape(s, ts.size).all(axis=1)
    if not usable.any():
        return None

    jumps = np.abs(np.diff(values, axis=1))
    jumps[~usable] = 0.0
    best = np.argmax(jumps, axis=1)
    order = np.argsort(-jumps[np.arange(s), best], kind="stable")

    for seg in order[: config.JUMP_REFINED_SEGMENTS]:
        g = int(best[seg])
        j0 = float(jumps[seg, g])
        if j0 <= tol.eq * max(1.0, float(np.max(np.abs(values[seg])))):
            break
        witness = _bisect_jump(spec, a[seg], b[seg], ts[g], ts[g + 1], values[seg, g], values[seg, g + 1], j0, tol)
        if witness is not None:
            return witness
    return None


def _bisect_jump(spec, a, b, lo, hi, f_lo, f_hi, j0, tol) -> Optional[Witness]:
    direction = b - a
    brackets = []
    for _ in range(config.JUMP_HALVINGS):
        mid = 0.5 * (lo + hi)
        point = a + mid * direction
        values, ok = field_values(spec.f, point[None, :])
        if not ok[0]:
            if member_mask(spec.domain, point[None, :], tol)[0]:
                return undefined_witness(point)
            return None
        f_mid = float(values[0])
        if abs(f_mid - f_lo) >= abs(f_hi - f_mid):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        brackets.append((lo, hi, abs(f_hi - f_lo)))

    final = brackets[-1][2]
    if final < 0.5 * j0 or final <= tol.eq * max(1.0, abs(f_lo)):
        return None

    tail = brackets[-5:]
    pairs = []
    for lo_t, hi_t, _ in tail:
        pairs += [(a + lo_t * direction).tolist(), (a + hi_t * direction).tolist()]
    jumps = [jump for _, _, jump in tail]
    return Witness(
        kind=WitnessKind.DISCONTINUITY,
        points=pairs,
        values=jumps,
        tolerance=0.5 * min(jumps),
        note=f"jump of {final:.6g} persists after {config.JUMP_HALVINGS} halvings",
    )


# -----------------------------
# Blow-up at rb(C)
# -----------------------------

def check_boundary_blowup(
    spec: FunctionSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: Optional[PointCloud] = None,
) -> ConditionReport:
    """
    Boundary points by bisection along random interior rays; each approach
    ladder must escalate. No boundary point inside the box is vacuous.
    """
    origins = samples.points if samples is not None else None
    rays = cast_boundary_rays(spec.domain, k, seed, tol, origins)
    report = ConditionReport(ConditionId.BOUNDARY_BLOWUP, Status.CERTIFIED, samples_used=rays.rays_cast)

    if len(rays) == 0:
        report.notes.append("rb(C) does not meet the sampling box (vacuous)")
        logger.info("Blow-up check: vacuous, no boundary point reached")
        return report

    outcomes = approach_ladders(spec, rays, tol)
    judged = [o for o in outcomes if len(o.values) >= config.MIN_LADDER_RUNGS]
    skipped = len(outcomes) - len(judged)
    if skipped:
        report.notes.append(f"{skipped} boundary points had too few approach rungs")
        logger.warning(f"Blow-up check skipped {skipped} short ladders")

    refuted = [o for o in judged if o.status is Status.REFUTED]
    if refuted:
        report.status = Status.REFUTED
        report.witness = refuted[0].witness(tol)
    elif not judged or any(o.status is Status.INCONCLUSIVE for o in judged):
        report.status = Status.INCONCLUSIVE
        undecided = sum(1 for o in judged if o.status is Status.INCONCLUSIVE)
        report.notes.append(f"{undecided} approach ladders without a clear trend")

    report.certificates.append({
        "boundary_points": len(rays),
        "ladders": len(judged),
        "refuted": len(refuted),
    })
    logger.info(f"Blow-up check: {report.status.value} ({len(judged)} ladders, {len(refuted)} bounded)")
    return report


# -----------------------------
# Verdict
# -----------------------------

def main_theorem_verdict(
    spec: FunctionSpec,
    k: int = config.DEFAULT_SAMPLES,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Verdict:
    """
    Runs every condition (later ones even when earlier ones fail) in the
    order domain, strict convexity, continuity, blow-up.
    """
    samples = sample_domain(spec.domain, k, seed, tol)
    conditions = [
        _guarded(ConditionId.DOMAIN_CONVEX_OPEN, check_domain_convex_open, spec.domain, k, seed, tol, samples),
        _guarded(ConditionId.F_STRICTLY_CONVEX, check_strict_convexity, spec, k, seed, tol, samples),
        _guarded(ConditionId.F_CONTINUOUS, check_continuity, spec, k, seed, tol, samples),
        _guarded(ConditionId.BOUNDARY_BLOWUP, check_boundary_blowup, spec, k, seed, tol, samples),
    ]
    verdict = Verdict.from_conditions(conditions, Mode.MAIN_THEOREM, seed, tol)
    verdict.stats = {"k": k, "samples": len(samples)}
    if verdict.overall is Status.CERTIFIED:
        verdict.notes.append("epigraph strictly convex by the main theorem (sampled certification)")
    logger.info(f"Main theorem verdict: {verdict.overall.value} for {spec.source or 'f'}")
    return verdict


def _guarded(condition: ConditionId, check, *args) -> ConditionReport:
    try:
        return check(*args)
    except (InputError, RegionTooThinError):
        raise
    except Exception as e:
        logger.exception(f"Condition {condition.value} failed unexpectedly: {e}")
        return ConditionReport(condition, Status.INCONCLUSIVE, notes=[f"internal error: {e}"])


# -----------------------------
# Jensen / convex-hull bound
# -----------------------------

def _convex_combinations(rng: np.random.Generator, points: np.ndarray, trials: int):
    m = points.shape[0]
    for _ in range(trials):
        size = int(rng.integers(2, min(config.JENSEN_MAX_POINTS, m) + 1)) if m >= 2 else 1
        chosen = rng.choice(m, size=size, replace=False)
        weights = rng.dirichlet(np.ones(size))
        yield chosen, weights


def jensen_probe(
    spec: FunctionSpec,
    points: np.ndarray,
    trials: int = config.JENSEN_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Status:
    """f(sum l_i x_i) <= sum l_i f(x_i) + tol_eq on random combinations of up to 5 points."""
    values, ok = field_values(spec.f, points)
    points, values = points[ok], values[ok]
    if points.shape[0] == 0:
        return Status.INCONCLUSIVE

    rng = make_rng(seed, "strict_convexity", 1)
    checked = 0
    for chosen, weights in _convex_combinations(rng, points, trials):
        z = weights @ points[chosen]
        if not region_mask(spec.domain, z[None, :], tol)[0]:
            continue
        fz, okz = field_values(spec.f, z[None, :])
        if not okz[0]:
            continue
        bound = float(weights @ values[chosen])
        checked += 1
        if fz[0] > bound + tol.eq * max(1.0, abs(bound)):
            logger.info(f"Jensen inequality fails at {z.tolist()}")
            return Status.REFUTED
    return Status.CERTIFIED if checked else Status.INCONCLUSIVE


def hull_bound_probe(
    spec: FunctionSpec,
    points: np.ndarray,
    trials: int = config.JENSEN_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Status:
    """f <= M on a finite set A implies f <= M on random convex combinations of A."""
    values, ok = field_values(spec.f, points)
    points, values = points[ok], values[ok]
    if points.shape[0] == 0:
        return Status.INCONCLUSIVE

    bound = float(values.max())
    rng = make_rng(seed, "strict_convexity", 2)
    checked = 0
    for chosen, weights in _convex_combinations(rng, points, trials):
        z = weights @ points[chosen]
        fz, okz = field_values(spec.f, z[None, :])
        if not okz[0] or not region_mask(spec.domain, z[None, :], tol)[0]:
            continue
        checked += 1
        if fz[0] > bound + tol.eq * max(1.0, abs(bound)):
            logger.info(f"Convex-hull bound {bound:.6g} exceeded at {z.tolist()}")
            return Status.REFUTED
    return Status.CERTIFIED if checked else Status.INCONCLUSIVE
