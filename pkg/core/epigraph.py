"""
Epigraph topology predicates.

Epi f = {(x, r) : x in C, f(x) <= r} and Epis f = {(x, r) : x in C, f(x) < r},
both living in Aff(C) x R. Interior membership follows the sublevel
criterion: (v, r) is interior iff v is interior to {f < r'} for some r' < r.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from core.boundary import classify_ladder
from core.domain import domain_hull, domain_member, region_mask, sample_domain
from core.functions import field_values, negate_field
from core.geometry import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    STATUS_CODES,
    box_exit_parameters,
    full_space,
    probe_directions,
    product_subspace,
    random_directions,
    relative_interior_member,
    ray_exits,
)
from shared import config
from shared.errors import InputError
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    DEFAULT_TOLERANCES,
    EpigraphHandle,
    EpigraphKind,
    FunctionSpec,
    Status,
    Tolerances,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


def epigraph_hull(spec: FunctionSpec) -> AffineSubspace:
    """Aff(C) x R, never estimated from samples."""
    return product_subspace(domain_hull(spec.domain), full_space(1))


class EpigraphSet:
    """
    Epi f or Epis f as a set handle over (m, n + 1) arrays, last column the
    height. Membership ignores the sampling box like every topology probe.
    """

    kind = "epigraph"

    def __init__(self, handle: EpigraphHandle, tol: Tolerances = DEFAULT_TOLERANCES):
        self.handle = handle
        self.tol = tol
        self._hull = epigraph_hull(handle.spec)

    @property
    def hull(self) -> AffineSubspace:
        return self._hull

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        n = self.handle.spec.dim
        x, r = points[:, :n], points[:, n]
        values, ok = field_values(self.handle.spec.f, x)
        inside = region_mask(self.handle.spec.domain, x, self.tol) & ok
        if self.handle.kind is EpigraphKind.STRICT_EPI:
            return inside & (values < r - self.tol.strict)
        return inside & (values <= r + self.tol.strict)


# -----------------------------
# Membership
# -----------------------------

def epi_member(h: EpigraphHandle, v, r: float, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    v = np.asarray(v, dtype=float).ravel()
    if not domain_member(h.spec.domain, v, tol):
        return False
    values, ok = field_values(h.spec.f, v[None, :])
    if not ok[0]:
        return False
    if h.kind is EpigraphKind.STRICT_EPI:
        return bool(values[0] < r - tol.strict)
    return bool(values[0] <= r + tol.strict)


def epi_interior_codes(
    spec: FunctionSpec,
    points: np.ndarray,
    heights: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> np.ndarray:
    """
    Vectorized interior test of (points[i], heights[i]) in Epi f.

    For each drop d with r - d > f(v), v must keep a ball (probe
    directions in Aff(C), ladder rungs) inside {f < r - d}.
    Certified: some drop keeps a ball. Refuted: v outside C, f(v) >= r -
    tol_strict, or every admissible drop loses a direction at all rungs.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    heights = np.asarray(heights, dtype=float).ravel()
    m, n = points.shape

    values, ok = field_values(spec.f, points)
    inside = region_mask(spec.domain, points, tol) & ok
    codes = np.full(m, INCONCLUSIVE, dtype=int)
    codes[~inside | (values >= heights - tol.strict)] = REFUTED
    open_rows = np.flatnonzero(codes == INCONCLUSIVE)
    if open_rows.size == 0:
        return codes

    directions = probe_directions(domain_hull(spec.domain), seed)
    drops = np.asarray(config.EPI_INTERIOR_DROPS)
    P, H, V = points[open_rows], heights[open_rows], values[open_rows]
    admissible = (H[:, None] - drops[None, :]) > V[:, None]

    if directions.shape[0] == 0:
        # 0-dimensional Aff(C): the sublevel set is the point itself
        certified = admissible.any(axis=1)
        codes[open_rows[certified]] = CERTIFIED
        return codes

    q = directions.shape[0]
    ball_fits = np.zeros((P.shape[0], drops.size), dtype=bool)
    exits_everywhere = np.ones((P.shape[0], drops.size, q), dtype=bool)
    for step in tol.probe_ladder:
        probes = (P[:, None, :] + step * directions[None, :, :]).reshape(-1, n)
        fp, okp = field_values(spec.f, probes)
        member = (region_mask(spec.domain, probes, tol) & okp).reshape(P.shape[0], q)
        fp = fp.reshape(P.shape[0], q)
        below = member[:, None, :] & (fp[:, None, :] < (H[:, None] - drops[None, :])[:, :, None])
        ball_fits |= below.all(axis=2)
        exits_everywhere &= ~below

    certified = (ball_fits & admissible).any(axis=1)
    lost = exits_everywhere.any(axis=2) | ~admissible
    refuted = admissible.any(axis=1) & lost.all(axis=1) & ~certified
    codes[open_rows[certified]] = CERTIFIED
    codes[open_rows[refuted]] = REFUTED
    return codes


def epi_interior_member(
    h: EpigraphHandle,
    v,
    r: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> Status:
    if h.kind is not EpigraphKind.EPI:
        raise InputError("epi_interior_member expects an epi handle")
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != h.spec.dim:
        raise InputError(f"Point has dimension {v.shape[0]}, function has {h.spec.dim}")
    code = epi_interior_codes(h.spec, v[None, :], np.array([r]), tol, seed)[0]
    return STATUS_CODES[code]


def strict_epi_interior_member(
    h: EpigraphHandle,
    v,
    r: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> Status:
    """Direct ball probe of (v, r) in Epis f within Aff(C) x R."""
    strict = EpigraphHandle(h.spec, EpigraphKind.STRICT_EPI)
    point = np.append(np.asarray(v, dtype=float).ravel(), float(r))
    return relative_interior_member(point, EpigraphSet(strict, tol), tol, seed)


# -----------------------------
# Semicontinuity and the sigma identity
# -----------------------------

def usc_at(
    spec: FunctionSpec,
    x0,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> Status:
    """(x0, f(x0) + eps) must be interior to Epi f for eps = 1e-1, 1e-2, 1e-3."""
    x0 = np.asarray(x0, dtype=float).ravel()
    values, ok = field_values(spec.f, x0[None, :])
    if not ok[0] or not region_mask(spec.domain, x0[None, :], tol)[0]:
        raise InputError(f"usc_at needs a domain member where f is defined, got {x0.tolist()}")

    heights = values[0] + np.asarray(config.USC_HEIGHTS)
    codes = epi_interior_codes(spec, np.repeat(x0[None, :], heights.size, axis=0), heights, tol, seed)
    return Status.combine([STATUS_CODES[c] for c in codes])


def strict_epi_complement_identity(
    h: EpigraphHandle,
    pts: Sequence[Tuple[Sequence[float], float]],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """
    Epis f = (C x R) minus sigma(Epi(-f)), sigma(x, r) = (x, -r), checked at
    every probe. Probes outside C or within tol_strict of the graph are skipped.
    """
    if h.kind is not EpigraphKind.STRICT_EPI:
        raise InputError("strict_epi_complement_identity expects a strict_epi handle")
    if not pts:
        return True

    xs = np.array([np.asarray(x, dtype=float).ravel() for x, _ in pts])
    rs = np.array([float(r) for _, r in pts])
    strict = EpigraphSet(h, tol).contains_many(np.column_stack([xs, rs]))

    negated = EpigraphHandle(
        FunctionSpec(negate_field(h.spec.f), h.spec.domain, f"-({h.spec.source})"),
        EpigraphKind.EPI,
    )
    reflected = EpigraphSet(negated, tol).contains_many(np.column_stack([xs, -rs]))

    values, ok = field_values(h.spec.f, xs)
    checked = region_mask(h.spec.domain, xs, tol) & ok & (np.abs(values - rs) > tol.strict)
    skipped = int((~checked).sum())
    if skipped:
        logger.info(f"Complement identity skipped {skipped} of {len(pts)} probes")
    return bool(np.all(strict[checked] == ~reflected[checked]))


# -----------------------------
# Closure and convexity of Epi f
# -----------------------------

@dataclass
class ClosureProbe:
    """Limit (x, r) of epigraph members along a ray; `slack` bounds the unfinished tail."""
    point: np.ndarray
    height: float
    slack: float
    at_boundary: bool
    member: bool


def epi_closure_limits(
    spec: FunctionSpec,
    count: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> List[ClosureProbe]:
    """
    Limits of epigraph sequences (x_j, f(x_j) + u) with x_j approaching a
    point of the ray through a member: half end inside C, half at the first
    boundary point. Sequences whose heights escalate have no finite limit
    and are dropped.
    """
    domain = spec.domain
    rng = make_rng(seed, "oracle_epigraph", 7)
    origins = sample_domain(domain, count, seed, tol).points
    directions = random_directions(domain_hull(domain).basis, count, rng)
    if directions.shape[0] == 0:
        return []

    t_max = box_exit_parameters(domain.lower, domain.upper, origins, directions)
    t_in, t_out, bounded = ray_exits(lambda p: region_mask(domain, p, tol), origins, directions, t_max)
    offsets = rng.choice(np.asarray(config.GRAPH_OFFSETS), size=count)
    to_boundary = bounded & (np.arange(count) % 2 == 0)
    stops = np.where(to_boundary, t_out, rng.uniform(0.2, 0.8, size=count) * t_in)

    distances = np.asarray(config.APPROACH_DISTANCES)
    probes = []
    for i in range(count):
        limit = origins[i] + stops[i] * directions[i]
        rungs = distances[distances < stops[i]]
        path = limit[None, :] - rungs[:, None] * directions[i][None, :]
        values, ok = field_values(spec.f, path)
        usable = ok & region_mask(domain, path, tol)
        values = values[usable]
        if values.size < config.MIN_LADDER_RUNGS or classify_ladder(values, tol) is not Status.REFUTED:
            continue

        height = float(values[-1] + offsets[i])
        slack = 2.0 * abs(float(values[-1] - values[-2])) + tol.eq * max(1.0, abs(height))
        member = False
        if region_mask(domain, limit[None, :], tol)[0]:
            f_limit, ok_limit = field_values(spec.f, limit[None, :])
            member = bool(ok_limit[0] and f_limit[0] <= height + slack)
        probes.append(ClosureProbe(limit, height, slack, bool(to_boundary[i]), member))

    logger.info(f"Closure probes: {len(probes)} finite limits from {count} rays")
    return probes


def epigraph_convexity_probe(
    spec: FunctionSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Status:
    """Plain midpoint convexity of Epi f on graph-and-above members."""
    points = sample_domain(spec.domain, k, seed, tol).points
    values, ok = field_values(spec.f, points)
    if not ok.all():
        return Status.REFUTED

    rng = make_rng(seed, "oracle_epigraph", 8)
    heights = values + rng.choice(np.asarray(config.GRAPH_OFFSETS), size=values.size)
    i = rng.integers(0, points.shape[0], size=k)
    j = rng.integers(0, points.shape[0], size=k)
    midpoints = 0.5 * (points[i] + points[j])
    mid_heights = 0.5 * (heights[i] + heights[j])

    fz, okz = field_values(spec.f, midpoints)
    inside = region_mask(spec.domain, midpoints, tol) & okz
    below = fz <= mid_heights + tol.eq * np.maximum(1.0, np.abs(mid_heights))
    if np.all(inside & below):
        return Status.CERTIFIED
    logger.info(f"Epigraph midpoint convexity fails on {int((~(inside & below)).sum())} of {k} pairs")
    return Status.REFUTED
