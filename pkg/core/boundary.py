"""
Relative-boundary sampling and the finite approach ladders that stand in for
the limit f(x) -> +inf at boundary points.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from core.domain import domain_hull, region_mask, sample_domain
from core.functions import field_values
from core.geometry import box_exit_parameters, random_directions, ray_exits
from shared import config
from shared.logger import setup_logger
from shared.models import (
    DEFAULT_TOLERANCES,
    DomainSpec,
    FunctionSpec,
    Status,
    Tolerances,
    Witness,
    WitnessKind,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


@dataclass
class BoundaryRays:
    """
    Rays from interior samples that leave the region through a constraint
    (not through the sampling window). `boundary` rows sit just outside the
    region; `reach` is the distance from the origin to the last inside point.
    """
    origins: np.ndarray
    directions: np.ndarray
    boundary: np.ndarray
    reach: np.ndarray
    rays_cast: int = 0

    def __len__(self) -> int:
        return int(self.origins.shape[0])


@dataclass
class LadderOutcome:
    status: Status
    boundary_point: np.ndarray
    direction: np.ndarray
    distances: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    reason: str = ""

    @property
    def approach_points(self) -> List[np.ndarray]:
        return [self.boundary_point - d * self.direction for d in self.distances]

    def witness(self, tol: Tolerances) -> Witness:
        return Witness(
            kind=WitnessKind.BOUNDED_AT_BOUNDARY,
            points=[self.boundary_point.tolist()] + [p.tolist() for p in self.approach_points],
            values=list(self.values),
            tolerance=tol.blowup_threshold,
            note=self.reason,
        )


def cast_boundary_rays(
    domain: DomainSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    origins: Optional[np.ndarray] = None,
) -> BoundaryRays:
    """
    Samples k interior points and random directions within Aff(C); keeps the
    rays that hit rb(C) inside the box, located by bisection.
    """
    if origins is None:
        origins = sample_domain(domain, k, seed, tol).points
    hull = domain_hull(domain)
    rng = make_rng(seed, "blowup")
    directions = random_directions(hull.basis, origins.shape[0], rng)
    n = domain.ambient_dim

    if directions.shape[0] == 0:
        empty = np.zeros((0, n))
        return BoundaryRays(empty, empty, empty, np.zeros(0), origins.shape[0])

    t_max = box_exit_parameters(domain.lower, domain.upper, origins, directions)
    t_in, t_out, bounded = ray_exits(
        lambda pts: region_mask(domain, pts, tol),
        origins,
        directions,
        t_max,
    )
    keep = bounded & (t_in > 0)
    boundary = origins[keep] + t_out[keep, None] * directions[keep]
    logger.info(f"Boundary rays: {int(keep.sum())} of {origins.shape[0]} hit rb(C) inside the box")
    return BoundaryRays(
        origins=origins[keep],
        directions=directions[keep],
        boundary=boundary,
        reach=t_in[keep],
        rays_cast=origins.shape[0],
    )


def classify_ladder(values: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES) -> Status:
    """
    Values ordered from the farthest rung to the nearest.

    Certified: the last three rungs increase and either the last value
    reaches the blow-up threshold or the increments escalate.
    Refuted: the ladder settles below the threshold (contracting
    increments), or it escalates downwards.
    Inconclusive otherwise, e.g. logarithmic divergence.

    Escalation alone certifies below the threshold: a 1/d barrier such as
    1/((1-x^2)(1-y^2)) only reaches about 5e5 at the nearest rung, 1e-6.
    """
    v = np.asarray(values, dtype=float)
    if v.size < config.MIN_LADDER_RUNGS or not np.all(np.isfinite(v)):
        return Status.INCONCLUSIVE

    inc = np.diff(v)
    last = v[-1]
    rising = bool(np.all(inc[-2:] > 0))
    falling = bool(np.all(inc[-2:] < 0))

    if rising and (last >= tol.blowup_threshold or inc[-1] >= config.BLOWUP_GROWTH * inc[-2]):
        return Status.CERTIFIED

    slack = tol.eq * max(1.0, abs(last))
    if last < tol.blowup_threshold and abs(inc[-1]) <= config.BLOWUP_CONTRACTION * abs(inc[-2]) + slack:
        return Status.REFUTED
    if falling and abs(inc[-1]) >= config.BLOWUP_GROWTH * abs(inc[-2]):
        return Status.REFUTED
    return Status.INCONCLUSIVE


def approach_ladders(
    spec: FunctionSpec,
    rays: BoundaryRays,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> List[LadderOutcome]:
    """Evaluates f at boundary - d * direction for the approach distances."""
    if len(rays) == 0:
        return []

    distances = np.asarray(config.APPROACH_DISTANCES)
    m, n = rays.boundary.shape
    points = rays.boundary[:, None, :] - distances[None, :, None] * rays.directions[:, None, :]
    flat = points.reshape(m * distances.size, n)
    values, ok = field_values(spec.f, flat)
    inside = region_mask(spec.domain, flat, tol)
    values = values.reshape(m, distances.size)
    usable = (ok & inside).reshape(m, distances.size)
    # rungs behind the ray origin are not on the approach segment
    usable &= distances[None, :] < rays.reach[:, None]

    outcomes = []
    for i in range(m):
        rung = usable[i]
        outcome = LadderOutcome(
            status=Status.INCONCLUSIVE,
            boundary_point=rays.boundary[i],
            direction=rays.directions[i],
            distances=distances[rung].tolist(),
            values=values[i, rung].tolist(),
        )
        if rung.sum() < config.MIN_LADDER_RUNGS:
            outcome.reason = "too few approach rungs inside the domain"
        else:
            outcome.status = classify_ladder(outcome.values, tol)
            outcome.reason = _ladder_reason(outcome.status, outcome.values)
        outcomes.append(outcome)
    return outcomes


def ladder_along(
    spec: FunctionSpec,
    boundary_point: np.ndarray,
    direction: np.ndarray,
    reach: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> LadderOutcome:
    """Single approach ladder; `direction` points from the inside towards the boundary point."""
    rays = BoundaryRays(
        origins=(boundary_point - reach * direction)[None, :],
        directions=np.asarray(direction, dtype=float)[None, :],
        boundary=np.asarray(boundary_point, dtype=float)[None, :],
        reach=np.array([reach]),
        rays_cast=1,
    )
    return approach_ladders(spec, rays, tol)[0]


def _ladder_reason(status: Status, values: Sequence[float]) -> str:
    last = values[-1] if values else float("nan")
    if status is Status.CERTIFIED:
        return f"values escalate to {last:.6g}"
    if status is Status.REFUTED:
        return f"values stay bounded near {last:.6g}"
    return f"values reach {last:.6g} without a clear trend"
