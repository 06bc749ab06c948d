"""
Brute-force oracle: strict convexity checked by definition.

A set is strictly convex when every open segment between two points of
its relative closure lies in its relative interior. The oracle samples a
closure proxy, takes three points on each open segment and probes them
for relative-interior membership. Bodies are sampled convex sets; the
epigraph oracle does the same for Epi f inside Aff(C) x R.
"""

from typing import List, Optional, Tuple

import numpy as np

from core.boundary import LadderOutcome, approach_ladders, cast_boundary_rays, ladder_along
from core.convexity import draw_pairs, sample_diameter, undefined_witness
from core.domain import domain_hull, member_mask, region_mask, sample_domain
from core.epigraph import EpigraphSet, epi_interior_codes
from core.functions import field_values
from core.geometry import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    ConvexHullSet,
    affine_hull,
    make_cloud,
    probe_directions,
    random_directions,
    ray_exits,
    relative_interior_codes,
    relative_interior_member,
)
from shared import config
from shared.errors import InputError
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    ConditionId,
    ConditionReport,
    DEFAULT_TOLERANCES,
    DomainSpec,
    EpigraphHandle,
    EpigraphKind,
    FunctionSpec,
    Mode,
    PointCloud,
    SampledBody,
    Status,
    Tolerances,
    Verdict,
    Witness,
    WitnessKind,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


# -----------------------------
# Sampled bodies
# -----------------------------

class BodySet:
    """SampledBody as a set handle for the relative-interior probes."""

    def __init__(self, body: SampledBody):
        self.body = body
        self.kind = body.kind

    @property
    def hull(self) -> AffineSubspace:
        return self.body.hull

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.body.contains(np.atleast_2d(points)), dtype=bool)


def body_handle(body: SampledBody) -> BodySet:
    return BodySet(body)


def body_from_points(points, tol: Tolerances = DEFAULT_TOLERANCES) -> SampledBody:
    """Convex hull of a point cloud (closed polytope)."""
    cloud = points if isinstance(points, PointCloud) else make_cloud(points)
    hull_set = ConvexHullSet(cloud, tol)
    return SampledBody(
        generators=cloud,
        hull=hull_set.hull,
        contains=hull_set.contains_many,
        kind="hull",
        search_radius=max(sample_diameter(cloud.points), 1e-12),
    )


def body_from_region(
    domain: DomainSpec,
    k: int = 256,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SampledBody:
    """An open constraint region, generated by k rejection samples."""
    cloud = sample_domain(domain, k, seed, tol)
    return SampledBody(
        generators=cloud,
        hull=affine_hull(cloud, tol),
        contains=lambda pts: region_mask(domain, pts, tol),
        kind="region",
        search_radius=float(np.linalg.norm(domain.upper - domain.lower)),
    )


def slice_body(
    body: SampledBody,
    plane: AffineSubspace,
    rng: np.random.Generator,
    count: int = 64,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[SampledBody]:
    """
    body ∩ plane, with generators rejection-sampled in plane coordinates.
    None when fewer than three members turn up.
    """
    radius = body.search_radius
    accepted: List[np.ndarray] = []
    for _ in range(8):
        coords = rng.uniform(-radius, radius, size=(max(256, 8 * count), plane.dim))
        candidates = plane.lift(coords)
        mask = np.asarray(body.contains(candidates), dtype=bool)
        accepted.append(candidates[mask])
        if sum(a.shape[0] for a in accepted) >= count:
            break

    members = np.vstack(accepted)[:count]
    if members.shape[0] < 3:
        return None

    def contains(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.asarray(body.contains(points), dtype=bool) & (plane.residuals(points) <= tol.aff)

    cloud = make_cloud(members)
    return SampledBody(
        generators=cloud,
        hull=affine_hull(cloud, tol),
        contains=contains,
        kind="slice",
        search_radius=radius,
    )


def _hull_members(body: SampledBody, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random members: convex combinations for polytopes, generators otherwise."""
    gens = body.generators.points
    if body.kind == "hull":
        weights = rng.dirichlet(np.ones(gens.shape[0]), size=count)
        return weights @ gens
    return gens[rng.integers(0, gens.shape[0], size=count)]


def _directional_limits(
    body: SampledBody,
    handle: BodySet,
    origins: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Last member along random rays from members: points of the relative boundary."""
    directions = random_directions(body.hull.basis, origins.shape[0], rng)
    if directions.shape[0] == 0:
        return np.zeros((0, body.hull.ambient_dim))
    t_max = np.full(origins.shape[0], 2.0 * body.search_radius)
    t_in, _, bounded = ray_exits(handle.contains_many, origins, directions, t_max)
    return origins[bounded] + t_in[bounded, None] * directions[bounded]


def _neighbour_pairs(points: np.ndarray, min_separation: float) -> Tuple[np.ndarray, np.ndarray]:
    """Each point with its nearest neighbour at least min_separation away."""
    if points.shape[0] < 2:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    dist[dist < max(min_separation, 1e-300)] = np.inf
    j = np.argmin(dist, axis=1)
    keep = np.isfinite(dist[np.arange(points.shape[0]), j])
    return np.flatnonzero(keep), j[keep]


def _segment_points(p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three open-segment points per pair, flattened pair-major; returns (z, pair index, t)."""
    ts = np.asarray(config.STRICT_CONVEXITY_PARAMS)
    z = (1.0 - ts[None, :, None]) * p[:, None, :] + ts[None, :, None] * q[:, None, :]
    pair = np.repeat(np.arange(p.shape[0]), ts.size)
    return z.reshape(-1, p.shape[1]), pair, np.tile(ts, p.shape[0])


# -----------------------------
# Body oracle
# -----------------------------

def oracle_strict_convexity(
    body: SampledBody,
    trials: int = config.DEFAULT_BODY_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Verdict:
    """
    Pairs come from the closure proxy (generators, random members and
    boundary limits along rays). Neighbouring boundary pairs go first,
    then random boundary pairs, then random pairs over the whole proxy.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")

    rng = make_rng(seed, "oracle_body")
    handle = body_handle(body)
    count = max(16, trials // 2)
    members = _hull_members(body, count, rng)
    limits = _directional_limits(body, handle, members, rng)
    edge_pool = np.vstack([body.generators.points, limits]) if body.kind == "hull" else limits
    pool = np.vstack([body.generators.points, members, limits])
    separation = config.BODY_PAIR_SEPARATION * sample_diameter(pool)

    a, b = _neighbour_pairs(edge_pool, separation)
    c, d = draw_pairs(rng, edge_pool, trials, separation)
    e, f = draw_pairs(rng, pool, trials, separation)
    p = np.vstack([edge_pool[a], edge_pool[c], pool[e]])[:trials]
    q = np.vstack([edge_pool[b], edge_pool[d], pool[f]])[:trials]

    report = ConditionReport(ConditionId.SET_STRICTLY_CONVEX, Status.CERTIFIED)
    stats = {"trials": trials, "pairs": int(p.shape[0]), "boundary_points": int(limits.shape[0])}
    if p.shape[0] == 0:
        report.notes.append("no two distinct closure points (vacuous)")
    else:
        z, pair, t = _segment_points(p, q)
        codes = relative_interior_codes(z, handle, tol, seed)
        report.samples_used = int(z.shape[0])
        stats["inconclusive"] = int((codes == INCONCLUSIVE).sum())
        refuted = np.flatnonzero(codes == REFUTED)
        if refuted.size:
            row = refuted[0]
            report.status = Status.REFUTED
            report.witness = _segment_witness(p[pair[row]], q[pair[row]], z[row], t[row], tol.aff)
        elif stats["inconclusive"]:
            report.status = Status.INCONCLUSIVE

    verdict = Verdict.from_conditions([report], Mode.ORACLE, seed, tol)
    verdict.stats = stats
    logger.info(f"Body oracle ({body.kind}): {verdict.overall.value} on {stats['pairs']} pairs")
    return verdict


def _segment_witness(p, q, z, t: float, tolerance: float, probes=(), drop: Optional[float] = None) -> Witness:
    values = [float(t)] if drop is None else [float(t), float(drop)]
    return Witness(
        kind=WitnessKind.BOUNDARY_SEGMENT,
        points=[np.asarray(v).tolist() for v in (p, q, z, *probes)],
        values=values,
        tolerance=tolerance,
        note="open-segment point between closure points is not in the relative interior",
    )


def ri_nonempty_check(
    body: SampledBody,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> bool:
    """The generators' centroid must certify as a relative-interior point."""
    centroid = body.generators.points.mean(axis=0)
    return relative_interior_member(centroid, body_handle(body), tol, seed) is Status.CERTIFIED


def oracle_plane_slices(
    body: SampledBody,
    m_planes: int = config.DEFAULT_PLANES,
    trials: int = config.DEFAULT_BODY_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Verdict:
    """
    body is strictly convex iff every plane slice is. Planes pass through
    three random members; a body whose hull is at most 2-dimensional is its
    own slice. Empty and degenerate slices are skipped and counted.
    """
    if body.hull.ambient_dim < 2:
        raise InputError("Plane slices need ambient dimension >= 2")

    if body.hull.dim <= 2:
        verdict = oracle_strict_convexity(body, trials, seed, tol)
        verdict.stats.update({"planes": 1, "analyzed": 1, "empty": 0, "degenerate": 0})
        return verdict

    verdicts, empty, degenerate = [], 0, 0
    for i in range(m_planes):
        triple = _hull_members(body, 3, make_rng(seed, "planes", i))
        plane = affine_hull(make_cloud(triple), tol)
        if plane.dim < 2:
            degenerate += 1
            continue
        slice_ = slice_body(body, plane, make_rng(seed, "slice", i), max(32, trials // 4), tol)
        if slice_ is None:
            empty += 1
            continue
        verdicts.append((i, oracle_strict_convexity(slice_, trials, seed, tol)))

    report = ConditionReport(
        ConditionId.SET_STRICTLY_CONVEX,
        Status.combine([v.overall for _, v in verdicts]) if verdicts else Status.INCONCLUSIVE,
        samples_used=len(verdicts),
    )
    for i, v in verdicts:
        if v.overall is Status.REFUTED:
            report.witness = v.witness
            report.notes.append(f"refuted on plane {i}")
            break

    verdict = Verdict.from_conditions([report], Mode.ORACLE, seed, tol)
    verdict.stats = {"planes": m_planes, "analyzed": len(verdicts), "empty": empty, "degenerate": degenerate}
    if empty or degenerate:
        logger.warning(f"Plane slices: {empty} empty and {degenerate} degenerate planes skipped")
    return verdict


# -----------------------------
# Epigraph oracle
# -----------------------------

def boundary_column_height(
    spec: FunctionSpec,
    boundary_point: np.ndarray,
    direction: np.ndarray,
    reach: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[float]:
    """
    Lowest closure height above a relative-boundary point, capped at
    tol.height_cap. None when f does not stay bounded on approach.
    """
    return _column_height(ladder_along(spec, boundary_point, direction, reach, tol), tol)


def _column_height(outcome: LadderOutcome, tol: Tolerances) -> Optional[float]:
    if outcome.status is not Status.REFUTED:
        return None
    return min(float(outcome.values[-1]), tol.height_cap)


def _boundary_columns(spec: FunctionSpec, origins: np.ndarray, seed: int, tol: Tolerances) -> np.ndarray:
    """Column pairs (x0, L + c) above boundary points where f stays bounded."""
    rays = cast_boundary_rays(spec.domain, origins.shape[0], seed, tol, origins=origins)
    columns = []
    for outcome in approach_ladders(spec, rays, tol):
        height = _column_height(outcome, tol)
        if height is None:
            continue
        for offset in config.COLUMN_OFFSETS:
            columns.append(np.append(outcome.boundary_point, height + offset))
    width = spec.dim + 1
    return np.array(columns).reshape(-1, width)


def _axis_pairs(
    spec: FunctionSpec,
    members: np.ndarray,
    values: np.ndarray,
    step: float,
    tol: Tolerances,
) -> Tuple[np.ndarray, np.ndarray]:
    """Graph pairs (x, f(x)), (x + step * e, f(x + step * e)) along the hull basis."""
    basis = domain_hull(spec.domain).basis
    if basis.shape[0] == 0 or members.shape[0] == 0:
        empty = np.zeros((0, spec.dim + 1))
        return empty, empty
    shifted = (members[:, None, :] + step * basis[None, :, :]).reshape(-1, spec.dim)
    origin = np.repeat(members, basis.shape[0], axis=0)
    origin_values = np.repeat(values, basis.shape[0])
    fs, ok = field_values(spec.f, shifted)
    keep = ok & member_mask(spec.domain, shifted, tol)
    p = np.column_stack([origin[keep], origin_values[keep]])
    q = np.column_stack([shifted[keep], fs[keep]])
    return p, q


def _exit_probes(
    spec: FunctionSpec,
    v: np.ndarray,
    r: float,
    tol: Tolerances,
    seed: int,
) -> Tuple[List[np.ndarray], Optional[float]]:
    """Probe points along a direction that leaves {f < r - drop} at every rung."""
    directions = probe_directions(domain_hull(spec.domain), seed)
    steps = np.asarray(tol.probe_ladder)
    values, _ = field_values(spec.f, v[None, :])
    for drop in config.EPI_INTERIOR_DROPS:
        if r - drop <= values[0]:
            continue
        for d in directions:
            path = v[None, :] + steps[:, None] * d[None, :]
            fp, ok = field_values(spec.f, path)
            below = member_mask(spec.domain, path, tol) & ok & (fp < r - drop)
            if not below.any():
                return [np.append(x, r) for x in path], float(drop)
    return [], None


def oracle_epigraph_strict_convexity(
    spec: FunctionSpec,
    trials: int = config.DEFAULT_TRIALS,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Verdict:
    """
    Definition-level check of Epi f in Aff(C) x R.

    Closure proxy: graph points (x, f(x) + u) for u in GRAPH_OFFSETS and,
    where f stays bounded towards rb(C), boundary columns (x0, L) and
    (x0, L + 1). Vertical column pairs are tested first, then graph pairs
    along the hull basis, then random pairs. Segment points the sublevel
    test leaves open are re-probed directly in Epis f.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")

    n = spec.dim
    count = max(32, trials // 8)
    members = sample_domain(spec.domain, count, seed, tol).points
    values, ok = field_values(spec.f, members)
    report = ConditionReport(ConditionId.EPIGRAPH_STRICTLY_CONVEX, Status.CERTIFIED)

    if not ok.all():
        report.status = Status.REFUTED
        report.witness = undefined_witness(members[int(np.argmin(ok))])
        report.notes.append("f is not finite on all of C")
        verdict = Verdict.from_conditions([report], Mode.ORACLE, seed, tol)
        verdict.stats = {"trials": trials, "pairs": 0, "columns": 0}
        return verdict

    rng = make_rng(seed, "oracle_epigraph")
    offsets = np.asarray(config.GRAPH_OFFSETS)
    graph = np.vstack([np.column_stack([members, values + u]) for u in offsets])
    columns = _boundary_columns(spec, members, seed, tol)
    diameter = sample_diameter(members)

    col_p, col_q = columns[0::2], columns[1::2]
    axis_p, axis_q = _axis_pairs(spec, members[: max(1, trials // 4)], values[: max(1, trials // 4)],
                                 0.1 * diameter, tol)
    pool = np.vstack([graph, columns])
    i, j = draw_pairs(rng, pool, trials, config.MIN_PAIR_SEPARATION * diameter)
    p = np.vstack([col_p, axis_p, pool[i]])[:trials]
    q = np.vstack([col_q, axis_q, pool[j]])[:trials]

    stats = {"trials": trials, "pairs": int(p.shape[0]), "columns": int(col_p.shape[0])}
    if p.shape[0] == 0:
        report.notes.append("no pairs of distinct closure points (vacuous)")
    else:
        z, pair, t = _segment_points(p, q)
        codes = epi_interior_codes(spec, z[:, :n], z[:, n], tol, seed)
        open_rows = np.flatnonzero(codes == INCONCLUSIVE)
        if open_rows.size:
            strict = EpigraphSet(EpigraphHandle(spec, EpigraphKind.STRICT_EPI), tol)
            retry = relative_interior_codes(z[open_rows], strict, tol, seed)
            codes[open_rows[retry == CERTIFIED]] = CERTIFIED
        report.samples_used = int(z.shape[0])
        stats["inconclusive"] = int((codes == INCONCLUSIVE).sum())

        refuted = np.flatnonzero(codes == REFUTED)
        if refuted.size:
            row = refuted[0]
            report.status = Status.REFUTED
            report.witness = _epigraph_witness(spec, p[pair[row]], q[pair[row]], z[row], t[row], tol, seed)
        elif stats["inconclusive"]:
            report.status = Status.INCONCLUSIVE

    verdict = Verdict.from_conditions([report], Mode.ORACLE, seed, tol)
    verdict.stats = stats
    logger.info(
        f"Epigraph oracle: {verdict.overall.value} on {stats['pairs']} pairs "
        f"({stats['columns']} boundary columns)"
    )
    return verdict


def _epigraph_witness(spec: FunctionSpec, p, q, z, t: float, tol: Tolerances, seed: int) -> Witness:
    x, r = z[:-1], float(z[-1])
    values, ok = field_values(spec.f, x[None, :])
    outside = not member_mask(spec.domain, x[None, :], tol)[0]
    if outside or not ok[0] or values[0] >= r - tol.strict:
        return _segment_witness(p, q, z, t, tol.strict)
    probes, drop = _exit_probes(spec, x, r, tol, seed)
    return _segment_witness(p, q, z, t, tol.strict, probes, drop)


def epigraph_interior_point(
    spec: FunctionSpec,
    seed: int = config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    candidates: int = 16,
) -> Optional[np.ndarray]:
    """First (x, f(x) + 1) over sampled members that certifies as interior to Epi f."""
    members = sample_domain(spec.domain, candidates, seed, tol).points
    values, ok = field_values(spec.f, members)
    members, heights = members[ok], values[ok] + 1.0
    if members.shape[0] == 0:
        return None
    codes = epi_interior_codes(spec, members, heights, tol, seed)
    hits = np.flatnonzero(codes == CERTIFIED)
    if hits.size == 0:
        return None
    return np.append(members[hits[0]], heights[hits[0]])
