from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.differentiation import jet
from core.expression import evaluate_many, parse
from core.geometry import full_space, make_cloud
from shared import config
from shared.errors import EvaluationDomainError, InputError, RegionTooThinError
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    DEFAULT_TOLERANCES,
    DomainSpec,
    Membership,
    PointCloud,
    Tolerances,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)


# -----------------------------
# Construction
# -----------------------------

def parse_box(text: str, n: int) -> Tuple[Tuple[float, float], ...]:
    """
    "lo1:hi1,lo2:hi2,..." -> ((lo1, hi1), ...). Every interval must be finite
    with lo < hi; a single interval is broadcast to all n coordinates.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("Sampling box is empty")

    intervals = []
    for part in parts:
        bounds = part.replace("−", "-").split(":")
        if len(bounds) != 2:
            raise InputError(f"Malformed box interval {part!r}, expected lo:hi")
        try:
            lo, hi = float(bounds[0]), float(bounds[1])
        except ValueError as exc:
            raise InputError(f"Malformed box interval {part!r}: {exc}") from exc
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
            raise InputError(f"Box interval {part!r} must be finite with lo < hi")
        intervals.append((lo, hi))

    if len(intervals) == 1 and n > 1:
        intervals = intervals * n
    if len(intervals) != n:
        raise InputError(f"Box has {len(intervals)} intervals but dimension is {n}")
    return tuple(intervals)


def split_constraints(text: str) -> List[str]:
    """Semicolon-separated constraint list; each entry means expr < 0."""
    return [part.strip() for part in text.split(";") if part.strip()]


def build_domain(
    n: int,
    constraints: Sequence[str] = (),
    box: str = "",
    equalities: Sequence[str] = (),
) -> DomainSpec:
    if n < 1:
        raise InputError(f"Dimension must be >= 1, got {n}")
    if not box:
        raise InputError("A sampling box is required (e.g. --box \"-1:1,-1:1\")")

    constraint_texts = [c for text in constraints for c in split_constraints(text)]
    equality_texts = [c for text in equalities for c in split_constraints(text)]

    domain = DomainSpec(
        ambient_dim=n,
        constraints=tuple(parse(src, n) for src in constraint_texts),
        box=parse_box(box, n),
        equalities=tuple(parse(src, n) for src in equality_texts),
        constraint_sources=tuple(constraint_texts),
        equality_sources=tuple(equality_texts),
    )
    if domain.equalities:
        # validates affineness and consistency up front
        domain_hull(domain)
    return domain


# -----------------------------
# Affine part
# -----------------------------

@lru_cache(maxsize=256)
def domain_hull(domain: DomainSpec) -> AffineSubspace:
    """
    Aff(C) as declared: the solution set of the affine equalities, or all of
    R^n. Base is the box center projected onto the solution set.
    """
    n = domain.ambient_dim
    center = 0.5 * (domain.lower + domain.upper)
    if not domain.equalities:
        return full_space(n, center)

    rows, offsets = [], []
    for expr, src in zip(domain.equalities, domain.equality_sources or [""] * len(domain.equalities)):
        try:
            j = jet(expr, center)
        except EvaluationDomainError as exc:
            raise InputError(f"Equality {src!r} cannot be evaluated: {exc}") from exc
        if np.max(np.abs(j.hess)) > 1e-12:
            raise InputError(f"Equality {src!r} is not affine")
        probe = center + domain.upper - domain.lower
        values, ok = evaluate_many(expr, probe[None, :])
        predicted = j.value + j.grad @ (probe - center)
        if not ok[0] or abs(values[0] - predicted) > 1e-9 * max(1.0, abs(predicted)):
            raise InputError(f"Equality {src!r} is not affine")
        rows.append(j.grad)
        offsets.append(j.value - j.grad @ center)

    A = np.vstack(rows)
    c = np.array(offsets)
    if np.allclose(A, 0.0):
        raise InputError("Affine equalities have zero gradient")

    particular, *_ = np.linalg.lstsq(A, -c, rcond=None)
    if np.linalg.norm(A @ particular + c) > config.TOL_AFF * max(1.0, np.linalg.norm(c)):
        raise InputError("Affine equalities are inconsistent")

    _, singular, vt = np.linalg.svd(A)
    rank = int(np.sum(singular > config.TOL_RANK * singular[0]))
    basis = vt[rank:]

    # project the box center onto the solution set
    base = particular + (center - particular) @ basis.T @ basis
    return AffineSubspace(base, basis.reshape(n - rank, n))


# -----------------------------
# Membership
# -----------------------------

def constraint_values(domain: DomainSpec, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(g values (m, k), ok mask (m,)) for every constraint."""
    points = np.atleast_2d(points)
    m = points.shape[0]
    if not domain.constraints:
        return np.zeros((m, 0)), np.ones(m, dtype=bool)
    columns, ok = [], np.ones(m, dtype=bool)
    for g in domain.constraints:
        values, good = evaluate_many(g, points)
        columns.append(values)
        ok &= good
    return np.column_stack(columns), ok


def in_box(domain: DomainSpec, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    return np.all((points >= domain.lower) & (points <= domain.upper), axis=1)


def region_mask(
    domain: DomainSpec,
    points: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """
    Membership in {g_i < -tol_strict, h_j = 0} ignoring the sampling box.
    Used by every topology probe; the box is only a sampling window.
    """
    points = np.atleast_2d(points)
    values, ok = constraint_values(domain, points)
    mask = ok & np.all(values < -tol.strict, axis=1) if values.shape[1] else ok.copy()
    if domain.equalities:
        mask &= domain_hull(domain).residuals(points) <= tol.aff
    return mask


def member_mask(
    domain: DomainSpec,
    points: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Vectorized domain_member: region membership inside the sampling box."""
    points = np.atleast_2d(points)
    return region_mask(domain, points, tol) & in_box(domain, points)


def classify_point(domain: DomainSpec, v, tol: Tolerances = DEFAULT_TOLERANCES) -> Membership:
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != domain.ambient_dim:
        raise InputError(f"Point has dimension {v.shape[0]}, domain has {domain.ambient_dim}")

    values, ok = constraint_values(domain, v[None, :])
    if not ok[0]:
        return Membership.UNDEFINED
    if not in_box(domain, v[None, :])[0]:
        return Membership.OUTSIDE
    if domain.equalities and domain_hull(domain).residuals(v)[0] > tol.aff:
        return Membership.OUTSIDE
    if values.shape[1] == 0 or np.all(values[0] < -tol.strict):
        return Membership.MEMBER
    if np.max(values[0]) > tol.strict:
        return Membership.OUTSIDE
    return Membership.NEAR_BOUNDARY


def domain_member(domain: DomainSpec, v, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    status = classify_point(domain, v, tol)
    if status is Membership.UNDEFINED:
        logger.warning(f"Constraint evaluation failed at {np.asarray(v).tolist()}; treated as non-member")
    return status is Membership.MEMBER


# -----------------------------
# Sampling
# -----------------------------

def sample_domain(
    domain: DomainSpec,
    k: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PointCloud:
    """
    k points uniform in the box conditioned on domain membership, by
    rejection. Affine-restricted domains are sampled in hull coordinates.
    """
    if k < 1:
        raise InputError(f"Sample count must be >= 1, got {k}")

    rng = make_rng(seed, "sample")
    hull = domain_hull(domain)
    restricted = bool(domain.equalities)
    radius = float(np.linalg.norm(domain.upper - domain.lower)) + float(
        np.linalg.norm(hull.base - 0.5 * (domain.lower + domain.upper))
    )

    batch = max(1024, 4 * k)
    accepted: List[np.ndarray] = []
    count, draws = 0, 0

    while count < k:
        if restricted:
            coords = rng.uniform(-radius, radius, size=(batch, hull.dim))
            candidates = hull.lift(coords) if hull.dim else np.repeat(hull.base[None, :], batch, axis=0)
        else:
            candidates = rng.uniform(domain.lower, domain.upper, size=(batch, domain.ambient_dim))
        mask = member_mask(domain, candidates, tol)
        draws += batch
        if mask.any():
            accepted.append(candidates[mask])
            count += int(mask.sum())

        rate = count / draws
        if draws >= config.MIN_DRAWS_BEFORE_GIVING_UP and rate < config.MIN_ACCEPTANCE_RATE:
            raise RegionTooThinError(
                f"Acceptance rate {rate:.2e} after {draws} draws is below "
                f"{config.MIN_ACCEPTANCE_RATE:.0e}; region too thin or empty"
            )

    points = np.vstack(accepted)[:k]
    logger.info(f"Sampled {k} domain points from {draws} draws (acceptance {count / draws:.3f})")
    return make_cloud(points)


# -----------------------------
# Set handle
# -----------------------------

class RegionSet:
    """DomainSpec region as a set handle for relative-topology probes."""

    kind = "region"

    def __init__(
        self,
        domain: DomainSpec,
        tol: Tolerances = DEFAULT_TOLERANCES,
        hull: Optional[AffineSubspace] = None,
    ):
        self.domain = domain
        self.tol = tol
        self._hull = hull if hull is not None else domain_hull(domain)

    @property
    def hull(self) -> AffineSubspace:
        return self._hull

    @property
    def window(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.domain.lower, self.domain.upper

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return region_mask(self.domain, points, self.tol)


def region_set(
    domain: DomainSpec,
    tol: Tolerances = DEFAULT_TOLERANCES,
    hull: Optional[AffineSubspace] = None,
) -> RegionSet:
    return RegionSet(domain, tol, hull)
