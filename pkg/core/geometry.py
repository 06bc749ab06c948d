"""
Affine and relative-topology primitives in R^n.

Every probe here is relative: balls and directions live in the affine hull
of the body being probed, never in the ambient space.
"""

from typing import Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from shared import config
from shared.errors import InputError
from shared.logger import setup_logger
from shared.models import (
    AffineSubspace,
    DEFAULT_TOLERANCES,
    PointCloud,
    Segment,
    SliceResult,
    Status,
    Tolerances,
)
from shared.seeding import make_rng

logger = setup_logger(__name__)

# Integer codes used by the vectorized probes
CERTIFIED, REFUTED, INCONCLUSIVE = 0, 1, 2
STATUS_CODES = (Status.CERTIFIED, Status.REFUTED, Status.INCONCLUSIVE)


# -----------------------------
# Vectors and clouds
# -----------------------------

def as_vector(coords, dim: Optional[int] = None) -> np.ndarray:
    """Validated float vector: finite coordinates, optional dimension check."""
    v = np.asarray(coords, dtype=float).ravel()
    if dim is not None and v.shape[0] != dim:
        raise InputError(f"Expected a vector of dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"Vector has non-finite coordinates: {v.tolist()}")
    return v


def make_cloud(points: Sequence) -> PointCloud:
    rows = [np.asarray(p, dtype=float).ravel() for p in points]
    if not rows:
        raise InputError("Point cloud must be non-empty")
    widths = {row.shape[0] for row in rows}
    if len(widths) != 1:
        raise InputError(f"Dimension mismatch among points: {sorted(widths)}")
    array = np.vstack(rows)
    if not np.all(np.isfinite(array)):
        raise InputError("Point cloud has non-finite coordinates")
    return PointCloud(array)


def segment_point(a, b, t: float) -> np.ndarray:
    """(1 - t) a + t b for t in [0, 1]."""
    a = as_vector(a)
    b = as_vector(b, a.shape[0])
    if not 0.0 <= t <= 1.0:
        raise InputError(f"Segment parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return a.copy()
    if t == 1.0:
        return b.copy()
    return Segment(a, b).point(t)


# -----------------------------
# Affine hulls
# -----------------------------

def affine_hull(cloud: PointCloud, tol: Tolerances = DEFAULT_TOLERANCES) -> AffineSubspace:
    """
    Smallest affine subspace containing the cloud, at rank tolerance
    tol.rank * (largest singular value).

    Base is the first point; the basis comes from Gram-Schmidt over the
    remaining points in input order, so equal inputs give equal bases.
    """
    points = cloud.points
    base = points[0].copy()
    centered = points[1:] - base
    n = points.shape[1]

    if centered.shape[0] == 0:
        return AffineSubspace(base, np.zeros((0, n)))

    singular = np.linalg.svd(centered, compute_uv=False)
    s_max = float(singular[0]) if singular.size else 0.0
    if s_max == 0.0:
        return AffineSubspace(base, np.zeros((0, n)))
    threshold = tol.rank * s_max
    rank = int(np.sum(singular > threshold))

    basis = []
    for row in centered:
        if len(basis) == rank:
            break
        residual = row.copy()
        for q in basis:
            residual -= (residual @ q) * q
        # second pass keeps orthogonality within tol.orth
        for q in basis:
            residual -= (residual @ q) * q
        norm = np.linalg.norm(residual)
        if norm > threshold:
            basis.append(residual / norm)

    if len(basis) < rank:
        # near-degenerate input order: complete from the right singular vectors
        _, _, vt = np.linalg.svd(centered)
        for candidate in vt[:rank]:
            residual = candidate.copy()
            for q in basis:
                residual -= (residual @ q) * q
            norm = np.linalg.norm(residual)
            if norm > tol.orth and len(basis) < rank:
                basis.append(residual / norm)

    return AffineSubspace(base, np.array(basis).reshape(len(basis), n))


def full_space(n: int, base: Optional[np.ndarray] = None) -> AffineSubspace:
    return AffineSubspace(np.zeros(n) if base is None else np.asarray(base, dtype=float), np.eye(n))


def product_subspace(a: AffineSubspace, b: AffineSubspace) -> AffineSubspace:
    """Aff(A) x Aff(B) as a subspace of R^(n_a + n_b)."""
    base = np.concatenate([a.base, b.base])
    top = np.hstack([a.basis, np.zeros((a.dim, b.ambient_dim))])
    bottom = np.hstack([np.zeros((b.dim, a.ambient_dim)), b.basis])
    return AffineSubspace(base, np.vstack([top, bottom]))


def product_cloud(cloud_a: PointCloud, cloud_b: PointCloud) -> PointCloud:
    left = np.repeat(cloud_a.points, len(cloud_b), axis=0)
    right = np.tile(cloud_b.points, (len(cloud_a), 1))
    return PointCloud(np.hstack([left, right]))


def affine_hull_product(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AffineSubspace:
    """Hull of the Cartesian product cloud A x B."""
    return affine_hull(product_cloud(cloud_a, cloud_b), tol)


def same_subspace(s: AffineSubspace, t: AffineSubspace, tol: float = config.TOL_AFF) -> bool:
    """Same dimension and mutual membership of bases and base points."""
    if s.dim != t.dim or s.ambient_dim != t.ambient_dim:
        return False
    if not t.contains(s.base, tol) or not s.contains(t.base, tol):
        return False
    for direction in s.basis:
        if not t.contains(t.base + direction, tol):
            return False
    for direction in t.basis:
        if not s.contains(s.base + direction, tol):
            return False
    return True


def direction_in_span(direction: np.ndarray, subspace: AffineSubspace, tol: float = config.TOL_AFF) -> bool:
    return subspace.contains(subspace.base + direction, tol)


# -----------------------------
# Probe directions
# -----------------------------

def random_directions(basis: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors uniformly distributed on the sphere of span(basis)."""
    dim, n = basis.shape
    if dim == 0 or count == 0:
        return np.zeros((0, n))
    coeffs = rng.standard_normal((count, dim))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    return coeffs @ basis


def probe_directions(hull: AffineSubspace, seed: int = config.DEFAULT_SEED) -> np.ndarray:
    """
    2 * dim axis directions of the hull's direction space plus
    RANDOM_PROBE_DIRECTIONS random ones.
    """
    if hull.dim == 0:
        return np.zeros((0, hull.ambient_dim))
    axes = np.vstack([hull.basis, -hull.basis])
    rng = make_rng(seed, "directions", hull.dim)
    extra = random_directions(hull.basis, config.RANDOM_PROBE_DIRECTIONS, rng)
    return np.vstack([axes, extra])


# -----------------------------
# Set handles
# -----------------------------

class SetHandle(Protocol):
    """
    Anything relative_interior_member can probe: a hull and a vectorized
    membership predicate over (m, n) arrays.
    """
    kind: str

    @property
    def hull(self) -> AffineSubspace: ...

    def contains_many(self, points: np.ndarray) -> np.ndarray: ...


class ConvexHullSet:
    """Convex hull of a point cloud, membership in hull coordinates."""

    kind = "convex_hull"

    def __init__(self, cloud: PointCloud, tol: Tolerances = DEFAULT_TOLERANCES):
        self.cloud = cloud
        self.tol = tol
        self._hull = affine_hull(cloud, tol)
        coords = self._hull.coordinates(cloud.points)
        self._scale = max(1.0, float(np.max(np.abs(coords))) if coords.size else 1.0)

        self._interval: Optional[Tuple[float, float]] = None
        self._equations: Optional[np.ndarray] = None
        if self._hull.dim == 1:
            self._interval = (float(coords.min()), float(coords.max()))
        elif self._hull.dim >= 2:
            self._equations = ConvexHull(coords).equations

    @property
    def hull(self) -> AffineSubspace:
        return self._hull

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        on_hull = self._hull.residuals(points) <= self.tol.aff
        if self._hull.dim == 0:
            return on_hull

        coords = self._hull.coordinates(points)
        slack = 1e-12 * self._scale
        if self._interval is not None:
            lo, hi = self._interval
            inside = (coords[:, 0] >= lo - slack) & (coords[:, 0] <= hi + slack)
        else:
            offsets = coords @ self._equations[:, :-1].T + self._equations[:, -1]
            inside = np.all(offsets <= slack, axis=1)
        return on_hull & inside


# -----------------------------
# Relative interior / closure
# -----------------------------

def relative_interior_codes(
    points: np.ndarray,
    body: SetHandle,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> np.ndarray:
    """
    Vectorized relative-interior probe; returns CERTIFIED / REFUTED /
    INCONCLUSIVE codes per row.

    Certified: every probe direction stays inside at some rung of the ladder.
    Refuted: the point is outside, or one direction exits at every rung.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]
    inside = body.contains_many(points)
    directions = probe_directions(body.hull, seed)

    codes = np.full(m, INCONCLUSIVE, dtype=int)
    if directions.shape[0] == 0:
        codes[inside] = CERTIFIED
        codes[~inside] = REFUTED
        return codes

    q = directions.shape[0]
    ladder = tol.probe_ladder
    ball_fits = np.zeros(m, dtype=bool)
    exits_everywhere = np.ones((m, q), dtype=bool)

    for step in ladder:
        probes = points[:, None, :] + step * directions[None, :, :]
        mask = body.contains_many(probes.reshape(m * q, -1)).reshape(m, q)
        ball_fits |= mask.all(axis=1)
        exits_everywhere &= ~mask

    codes[~inside | exits_everywhere.any(axis=1)] = REFUTED
    codes[inside & ball_fits] = CERTIFIED
    return codes


def relative_interior_member(
    v,
    body: SetHandle,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> Status:
    if not hasattr(body, "contains_many") or not hasattr(body, "hull"):
        raise InputError(f"Unknown set handle: {type(body).__name__}")
    v = as_vector(v, body.hull.ambient_dim)
    code = relative_interior_codes(v[None, :], body, tol, seed)[0]
    return STATUS_CODES[code]


def relative_closure_member(
    v,
    body: SetHandle,
    approach_directions: Optional[np.ndarray] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.DEFAULT_SEED,
) -> Status:
    """
    Closure membership through approach paths: Certified when v is in the
    body or when v + s * d is inside for every rung s along some direction d.
    No path found is Inconclusive; closure is never refuted by sampling.
    """
    v = as_vector(v, body.hull.ambient_dim)
    if body.contains_many(v[None, :])[0]:
        return Status.CERTIFIED
    if approach_directions is None:
        approach_directions = probe_directions(body.hull, seed)
    if len(approach_directions) == 0:
        return Status.INCONCLUSIVE

    ladder = tol.probe_ladder
    for d in np.atleast_2d(approach_directions):
        path = v[None, :] + np.array(ladder)[:, None] * d[None, :]
        if body.contains_many(path).all():
            return Status.CERTIFIED
    return Status.INCONCLUSIVE


# -----------------------------
# Rays and line slices
# -----------------------------

def box_exit_parameters(
    lower: np.ndarray,
    upper: np.ndarray,
    origins: np.ndarray,
    directions: np.ndarray,
) -> np.ndarray:
    """Largest t >= 0 with origin + t * direction still in the closed box."""
    origins = np.atleast_2d(origins)
    directions = np.atleast_2d(directions)
    with np.errstate(divide="ignore", invalid="ignore"):
        to_upper = np.where(directions > 0, (upper - origins) / directions, np.inf)
        to_lower = np.where(directions < 0, (lower - origins) / directions, np.inf)
    t = np.minimum(to_upper, to_lower).min(axis=1)
    return np.maximum(t, 0.0)


def ray_exits(
    contains_many,
    origins: np.ndarray,
    directions: np.ndarray,
    t_max: np.ndarray,
    scan_steps: int = config.SLICE_SCAN_STEPS,
    bisection_steps: int = config.BISECTION_STEPS,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized exit search along rays origin + t * direction, t in (0, t_max].

    Scans a grid for the first non-member, then bisects. Returns
    (t_in, t_out, bounded): t_in is inside, t_out outside, and rays that stay
    inside up to t_max are unbounded (t_in = t_max, t_out = inf).
    """
    origins = np.atleast_2d(origins)
    directions = np.atleast_2d(directions)
    m = origins.shape[0]
    fractions = np.arange(1, scan_steps + 1) / scan_steps
    ts = fractions[None, :] * t_max[:, None]
    probes = origins[:, None, :] + ts[:, :, None] * directions[:, None, :]
    inside = contains_many(probes.reshape(m * scan_steps, -1)).reshape(m, scan_steps)

    bounded = ~inside.all(axis=1)
    first_out = np.argmin(inside, axis=1)
    lo = np.where(first_out > 0, ts[np.arange(m), np.maximum(first_out - 1, 0)], 0.0)
    hi = ts[np.arange(m), first_out]

    active = np.flatnonzero(bounded)
    if active.size:
        a_lo, a_hi = lo[active], hi[active]
        for _ in range(bisection_steps):
            mid = 0.5 * (a_lo + a_hi)
            points = origins[active] + mid[:, None] * directions[active]
            mid_in = contains_many(points)
            a_lo = np.where(mid_in, mid, a_lo)
            a_hi = np.where(mid_in, a_hi, mid)
        lo[active], hi[active] = a_lo, a_hi

    t_in = np.where(bounded, lo, t_max)
    t_out = np.where(bounded, hi, np.inf)
    return t_in, t_out, bounded


def relative_boundary_of_line_slice(region, line: AffineSubspace) -> SliceResult:
    """
    Endpoints of the open interval C ∩ L along a 1-dimensional line.

    `region` is a DomainSpec or any handle with `contains_many` and a
    `window` (lower, upper) box. Ends reaching the window are unbounded.
    """
    from core.domain import region_set
    from shared.models import DomainSpec

    if line.dim != 1:
        raise InputError(f"Line slices need a 1-dimensional subspace, got dim {line.dim}")
    if isinstance(region, DomainSpec):
        region = region_set(region)

    base = line.base
    direction = line.basis[0]
    lower, upper = region.window

    t_hi = float(box_exit_parameters(lower, upper, base, direction)[0])
    t_lo = -float(box_exit_parameters(lower, upper, base, -direction)[0])
    in_box = bool(np.all(base >= lower) and np.all(base <= upper))

    if not in_box:
        window = _line_box_window(lower, upper, base, direction)
        if window is None:
            return SliceResult(base, direction, (0.0, 0.0), missed=True)
        t_lo, t_hi = window

    t0 = _find_member_parameter(region, base, direction, t_lo, t_hi)
    if t0 is None:
        return SliceResult(base, direction, (t_lo, t_hi), missed=True)

    origin = base + t0 * direction
    both = np.vstack([direction, -direction])
    origins = np.vstack([origin, origin])
    spans = np.array([t_hi - t0, t0 - t_lo])
    t_in, t_out, bounded = ray_exits(region.contains_many, origins, both, spans)

    upper_out = t0 + t_out[0] if bounded[0] else None
    upper_in = t0 + t_in[0] if bounded[0] else None
    lower_out = t0 - t_out[1] if bounded[1] else None
    lower_in = t0 - t_in[1] if bounded[1] else None

    return SliceResult(
        base=base,
        direction=direction,
        window=(t_lo, t_hi),
        member_parameter=t0,
        lower=lower_out,
        upper=upper_out,
        lower_inner=lower_in,
        upper_inner=upper_in,
    )


def _line_box_window(lower, upper, base, direction) -> Optional[Tuple[float, float]]:
    """Parameter interval of the line inside the box, None when it misses."""
    t_lo, t_hi = -np.inf, np.inf
    for b, d, lo, hi in zip(base, direction, lower, upper):
        if abs(d) < 1e-15:
            if b < lo or b > hi:
                return None
            continue
        a1, a2 = (lo - b) / d, (hi - b) / d
        t_lo = max(t_lo, min(a1, a2))
        t_hi = min(t_hi, max(a1, a2))
    if t_lo > t_hi:
        return None
    return float(t_lo), float(t_hi)


def _find_member_parameter(region, base, direction, t_lo: float, t_hi: float) -> Optional[float]:
    """A parameter of the line inside the region, closest to 0."""
    if t_lo <= 0.0 <= t_hi and region.contains_many(base[None, :])[0]:
        return 0.0
    ts = np.linspace(t_lo, t_hi, config.LINE_MEMBER_SCAN)
    inside = region.contains_many(base[None, :] + ts[:, None] * direction[None, :])
    if not inside.any():
        return None
    candidates = ts[inside]
    return float(candidates[np.argmin(np.abs(candidates))])
