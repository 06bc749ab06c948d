"""
Witness replay.

Every refuting witness is re-checked from its stored data using only
scalar evaluation of f and domain membership:

    midpoint_violation   f against its chord at stored convex combinations
    nonconvex_domain     members whose stored combination is not a member
    bounded_at_boundary  a non-member limit point with a bounded approach ladder
    discontinuity        an undefined member, or jumps that persist on shrinking pairs
    boundary_segment     an open-segment point that is not interior to Epi f, between
                         two points of the closure of Epi f
"""

from typing import List, Optional

import numpy as np

from core.boundary import classify_ladder, ladder_along
from core.domain import domain_member, region_mask, region_set, sample_domain
from core.functions import field_value
from core.geometry import relative_closure_member, relative_interior_member
from shared import config
from shared.errors import EvaluationDomainError, RegionTooThinError
from shared.logger import setup_logger
from shared.models import (
    DEFAULT_TOLERANCES,
    FunctionSpec,
    SampledBody,
    Status,
    Tolerances,
    Witness,
    WitnessKind,
)

logger = setup_logger(__name__)

# combinations are stored rounded to binary64
_COMBINATION_TOL = 1e-9


def replay_witness(witness: Witness, spec: FunctionSpec, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff the stored data reproduces the violation its kind claims."""
    replay = {
        WitnessKind.MIDPOINT_VIOLATION: _replay_midpoint,
        WitnessKind.NONCONVEX_DOMAIN: _replay_nonconvex_domain,
        WitnessKind.BOUNDED_AT_BOUNDARY: _replay_bounded,
        WitnessKind.DISCONTINUITY: _replay_discontinuity,
        WitnessKind.BOUNDARY_SEGMENT: _replay_epigraph_segment,
    }[witness.kind]
    points = [np.asarray(p, dtype=float) for p in witness.points]
    try:
        ok = replay(witness, points, spec, tol)
    except EvaluationDomainError as exc:
        logger.warning(f"Witness replay hit an evaluation error: {exc}")
        ok = False
    if not ok:
        logger.warning(f"Witness of kind {witness.kind.value} did not replay")
    return ok


def _member(spec: FunctionSpec, v: np.ndarray, tol: Tolerances) -> bool:
    return domain_member(spec.domain, v, tol)


def _on_segment(x, y, z, t: float) -> bool:
    expected = (1.0 - t) * x + t * y
    return bool(np.linalg.norm(expected - z) <= _COMBINATION_TOL * max(1.0, float(np.linalg.norm(z))))


def _replay_midpoint(w: Witness, points: List[np.ndarray], spec: FunctionSpec, tol: Tolerances) -> bool:
    x, y, inner = points[0], points[1], points[2:]
    if len(inner) != len(w.values) or not inner or np.array_equal(x, y):
        return False
    if not (_member(spec, x, tol) and _member(spec, y, tol)):
        return False

    fx, fy = field_value(spec.f, x), field_value(spec.f, y)
    gaps = []
    for z, t in zip(inner, w.values):
        if not (_on_segment(x, y, z, t) and _member(spec, z, tol)):
            return False
        chord = (1.0 - t) * fx + t * fy
        gaps.append((field_value(spec.f, z) - chord, w.tolerance * max(1.0, abs(chord))))

    if w.breaks_convexity:
        return any(excess > slack for excess, slack in gaps)
    return all(abs(excess) <= slack for excess, slack in gaps)


def _replay_nonconvex_domain(w: Witness, points: List[np.ndarray], spec: FunctionSpec, tol: Tolerances) -> bool:
    if len(points) == 3:
        x, y, z = points
        return (
            _member(spec, x, tol)
            and _member(spec, y, tol)
            and _on_segment(x, y, z, w.values[0])
            and not _member(spec, z, tol)
        )
    if len(points) == 2:
        v, exit_point = points
        step = float(np.linalg.norm(exit_point - v))
        return _member(spec, v, tol) and not _member(spec, exit_point, tol) and step <= w.values[0] * (1 + 1e-9)
    if len(points) == 1:
        return not _member(spec, points[0], tol)
    return False


def _replay_bounded(w: Witness, points: List[np.ndarray], spec: FunctionSpec, tol: Tolerances) -> bool:
    boundary, approach = points[0], points[1:]
    if len(approach) != len(w.values) or _member(spec, boundary, tol):
        return False
    distances = [float(np.linalg.norm(p - boundary)) for p in approach]
    if not distances or any(b >= a for a, b in zip(distances, distances[1:])):
        return False
    if distances[-1] > tol.r_probe or not _in_region_closure(spec, boundary, tol):
        return False

    values = []
    for p, stored in zip(approach, w.values):
        if not _member(spec, p, tol):
            return False
        value = field_value(spec.f, p)
        if abs(value - stored) > 1e-12 * max(1.0, abs(stored)):
            return False
        values.append(value)
    return classify_ladder(values, tol) is Status.REFUTED


def _replay_discontinuity(w: Witness, points: List[np.ndarray], spec: FunctionSpec, tol: Tolerances) -> bool:
    if len(points) == 1:
        if not _member(spec, points[0], tol):
            return False
        try:
            field_value(spec.f, points[0])
        except EvaluationDomainError:
            return True
        return False

    if len(points) % 2 or len(points) < 4:
        return False
    pairs = list(zip(points[0::2], points[1::2]))
    distances = [float(np.linalg.norm(p - q)) for p, q in pairs]
    if any(b > a for a, b in zip(distances, distances[1:])):
        return False
    for p, q in pairs:
        if not (_member(spec, p, tol) and _member(spec, q, tol)):
            return False
        if abs(field_value(spec.f, p) - field_value(spec.f, q)) < w.tolerance:
            return False
    return True


def _replay_epigraph_segment(w: Witness, points: List[np.ndarray], spec: FunctionSpec, tol: Tolerances) -> bool:
    """
    Points are (x, r) in R^(n+1): the pair p, q, the segment point z, then
    optional probes along a direction that leaves {f < r_z - drop}.
    """
    p, q, z, probes = points[0], points[1], points[2], points[3:]
    if not _on_segment(p, q, z, w.values[0]) or np.array_equal(p, q):
        return False
    if not (_closure_point(spec, p, tol) and _closure_point(spec, q, tol)):
        return False

    x, r = z[:-1], float(z[-1])
    if not _in_region(spec, x, tol):
        # over rb(C) nothing is interior to Epi f
        return _in_region_closure(spec, x, tol)
    if field_value(spec.f, x) >= r - w.tolerance:
        return True
    if not probes or len(w.values) < 2:
        return False

    drop = w.values[1]
    for probe in probes:
        px = probe[:-1]
        if _member(spec, px, tol) and field_value(spec.f, px) < r - drop:
            return False
    return True


def _closure_point(spec: FunctionSpec, point: np.ndarray, tol: Tolerances) -> bool:
    """
    (x, r) in the closure of Epi f: x in C with f(x) <= r, or x in rc(C)
    with f bounded on some approach to x by a limit at most r.
    """
    x, r = point[:-1], float(point[-1])
    if _in_region(spec, x, tol):
        return field_value(spec.f, x) <= r + tol.eq * max(1.0, abs(r))
    height = _closure_height(spec, x, tol)
    return height is not None and r >= height


def _in_region(spec: FunctionSpec, x: np.ndarray, tol: Tolerances) -> bool:
    return bool(region_mask(spec.domain, x[None, :], tol)[0])


def _inward_paths(spec: FunctionSpec, x0: np.ndarray, tol: Tolerances):
    """Unit directions from x0 towards sampled members of C, with their lengths."""
    try:
        inside = sample_domain(spec.domain, config.REPLAY_REFERENCE_POINTS, config.DEFAULT_SEED, tol).points
    except RegionTooThinError:
        return np.zeros((0, x0.size)), np.zeros(0)
    offsets = inside - x0[None, :]
    lengths = np.linalg.norm(offsets, axis=1)
    keep = lengths > 0
    return offsets[keep] / lengths[keep, None], lengths[keep]


def _in_region_closure(spec: FunctionSpec, x0: np.ndarray, tol: Tolerances) -> bool:
    directions, _ = _inward_paths(spec, x0, tol)
    if directions.shape[0] == 0:
        return False
    return relative_closure_member(x0, region_set(spec.domain, tol), directions, tol) is Status.CERTIFIED


def _closure_height(spec: FunctionSpec, x0: np.ndarray, tol: Tolerances) -> Optional[float]:
    """
    Lowest height of the closure of Epi f above x0 outside C, less the
    unfinished ladder tail. None when x0 is not in rc(C) or f escalates on
    every approach.
    """
    if not _in_region_closure(spec, x0, tol):
        return None

    directions, lengths = _inward_paths(spec, x0, tol)
    heights = []
    for d, length in zip(directions, lengths):
        outcome = ladder_along(spec, x0, -d, float(length), tol)
        if outcome.status is not Status.REFUTED:
            continue
        v = outcome.values
        tail = 2.0 * abs(v[-1] - v[-2]) + tol.eq * max(1.0, abs(v[-1]))
        heights.append(v[-1] - tail)
    return min(heights) if heights else None


def replay_body_witness(
    witness: Witness,
    body: SampledBody,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: Optional[int] = None,
) -> bool:
    """Set-level boundary_segment witness: the stored segment point fails relative-interior membership."""
    from core.oracle import body_handle

    if witness.kind is not WitnessKind.BOUNDARY_SEGMENT or len(witness.points) < 3:
        return False
    p, q, z = (np.asarray(v, dtype=float) for v in witness.points[:3])
    if not _on_segment(p, q, z, witness.values[0]):
        return False
    kwargs = {} if seed is None else {"seed": seed}
    return relative_interior_member(z, body_handle(body), tol, **kwargs) is not Status.CERTIFIED
