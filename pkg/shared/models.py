from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared import config
from shared.errors import InputError


# -----------------------------
# Evidence grades
# -----------------------------

class Status(str, Enum):
    """Tri-state outcome used by every probe and verdict."""
    CERTIFIED = "certified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"

    @staticmethod
    def combine(statuses: Sequence["Status"]) -> "Status":
        """Certified iff all Certified; Refuted iff any Refuted; else Inconclusive."""
        statuses = list(statuses)
        if any(s is Status.REFUTED for s in statuses):
            return Status.REFUTED
        if statuses and all(s is Status.CERTIFIED for s in statuses):
            return Status.CERTIFIED
        return Status.INCONCLUSIVE


class Membership(str, Enum):
    MEMBER = "member"
    NEAR_BOUNDARY = "near_boundary"
    OUTSIDE = "outside"
    UNDEFINED = "undefined"   # a constraint could not be evaluated


class ConditionId(str, Enum):
    DOMAIN_CONVEX_OPEN = "domain_convex_open"
    F_STRICTLY_CONVEX = "f_strictly_convex"
    F_CONTINUOUS = "f_continuous"
    BOUNDARY_BLOWUP = "boundary_blowup"
    # oracle mode judges the sets directly
    EPIGRAPH_STRICTLY_CONVEX = "epigraph_strictly_convex"
    SET_STRICTLY_CONVEX = "set_strictly_convex"


CONDITION_ORDER = (
    ConditionId.DOMAIN_CONVEX_OPEN,
    ConditionId.F_STRICTLY_CONVEX,
    ConditionId.F_CONTINUOUS,
    ConditionId.BOUNDARY_BLOWUP,
)

# Checklist labels, in the order the hypotheses are stated
CONDITION_LABELS = {
    ConditionId.DOMAIN_CONVEX_OPEN: "C is convex and open in Aff(C)",
    ConditionId.F_STRICTLY_CONVEX: "f is strictly convex",
    ConditionId.F_CONTINUOUS: "f is continuous",
    ConditionId.BOUNDARY_BLOWUP: "f(x) -> +inf as x -> x0, for every x0 in rb(C)",
    ConditionId.EPIGRAPH_STRICTLY_CONVEX: "Epi f is strictly convex",
    ConditionId.SET_STRICTLY_CONVEX: "the sampled body is strictly convex",
}


class Mode(str, Enum):
    MAIN_THEOREM = "main_theorem"
    ORACLE = "oracle"
    LINES = "lines"


class WitnessKind(str, Enum):
    MIDPOINT_VIOLATION = "midpoint_violation"
    BOUNDARY_SEGMENT = "boundary_segment"
    BOUNDED_AT_BOUNDARY = "bounded_at_boundary"
    NONCONVEX_DOMAIN = "nonconvex_domain"
    DISCONTINUITY = "discontinuity"


class EpigraphKind(str, Enum):
    EPI = "epi"                # f(x) <= r
    STRICT_EPI = "strict_epi"  # f(x) < r


# -----------------------------
# Tolerances
# -----------------------------

@dataclass(frozen=True)
class Tolerances:
    """
    Every tunable tolerance in one place.
    Defaults come from shared.config; CLI overrides go through `with_overrides`.
    """
    rank: float = config.TOL_RANK
    aff: float = config.TOL_AFF
    orth: float = config.TOL_ORTH
    strict: float = config.TOL_STRICT
    eq: float = config.TOL_EQ
    sc: float = config.TOL_SC
    psd: float = config.TOL_PSD
    r_probe: float = config.R_PROBE
    blowup_threshold: float = config.BLOWUP_THRESHOLD
    height_cap: float = config.HEIGHT_CAP

    def with_overrides(self, overrides: Dict[str, float]) -> "Tolerances":
        for name, value in overrides.items():
            if name not in self.__dataclass_fields__:
                raise InputError(f"Unknown tolerance: {name}")
            if not value > 0:
                raise InputError(f"Tolerance {name} must be positive, got {value}")
        return replace(self, **overrides)

    @property
    def probe_ladder(self) -> Tuple[float, ...]:
        # first rung is r_probe, the rest are fixed
        return (self.r_probe,) + tuple(s for s in config.PROBE_LADDER[1:] if s < self.r_probe)

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


DEFAULT_TOLERANCES = Tolerances()


# -----------------------------
# Geometry
# -----------------------------

@dataclass(frozen=True, eq=False)
class Segment:
    """
    (1 - t) a + t b with t in [0, 1] (closed) or (0, 1) (open).
    """
    endpoint_a: np.ndarray
    endpoint_b: np.ndarray
    closed: bool = True

    @property
    def is_empty(self) -> bool:
        return (not self.closed) and bool(np.array_equal(self.endpoint_a, self.endpoint_b))

    def point(self, t: float) -> np.ndarray:
        return (1.0 - t) * self.endpoint_a + t * self.endpoint_b


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """
    base + span(basis). `basis` is a (dim, n) array with orthonormal rows.
    """
    base: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.base.shape[0])

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        """Coordinates of (points - base) in the basis, shape (m, dim)."""
        centered = np.atleast_2d(points) - self.base
        return centered @ self.basis.T

    def lift(self, coords: np.ndarray) -> np.ndarray:
        return self.base + np.atleast_2d(coords) @ self.basis

    def residuals(self, points: np.ndarray) -> np.ndarray:
        centered = np.atleast_2d(points) - self.base
        projected = (centered @ self.basis.T) @ self.basis
        return np.linalg.norm(centered - projected, axis=1)

    def contains(self, point: np.ndarray, tol: float = config.TOL_AFF) -> bool:
        return bool(self.residuals(point)[0] <= tol)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray   # (m, n)

    @property
    def ambient_dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True, eq=False)
class SliceResult:
    """
    The interval C ∩ L along a line base + t * direction.

    `lower` / `upper` are the parameters of the finite endpoints (just
    outside the region), `lower_inner` / `upper_inner` the last parameters
    found inside. An end that reaches the sampling window is unbounded and
    has None. `missed` means the line does not meet the region in the window.
    """
    base: np.ndarray
    direction: np.ndarray
    window: Tuple[float, float]
    member_parameter: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    lower_inner: Optional[float] = None
    upper_inner: Optional[float] = None
    missed: bool = False

    @property
    def lower_unbounded(self) -> bool:
        return not self.missed and self.lower is None

    @property
    def upper_unbounded(self) -> bool:
        return not self.missed and self.upper is None

    @property
    def parameters(self) -> List[float]:
        return [t for t in (self.lower, self.upper) if t is not None]

    @property
    def endpoints(self) -> List[np.ndarray]:
        return [self.base + t * self.direction for t in self.parameters]

    @property
    def interval(self) -> Tuple[float, float]:
        """Sampling interval: slice ends clipped to the window."""
        lo = self.lower_inner if self.lower_inner is not None else self.window[0]
        hi = self.upper_inner if self.upper_inner is not None else self.window[1]
        return lo, hi


# -----------------------------
# Function model
# -----------------------------

@dataclass(frozen=True)
class DomainSpec:
    """
    Open region {x : g_i(x) < 0, h_j(x) = 0} sampled inside `box`.
    Constraints and equalities are parsed expressions; sources keep the text.
    """
    ambient_dim: int
    constraints: Tuple[Any, ...]
    box: Tuple[Tuple[float, float], ...]
    equalities: Tuple[Any, ...] = ()
    constraint_sources: Tuple[str, ...] = ()
    equality_sources: Tuple[str, ...] = ()

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.box], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.box], dtype=float)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True)
class FunctionSpec:
    f: Any                 # Expr or GridFunction
    domain: DomainSpec
    source: str = ""

    @property
    def dim(self) -> int:
        return self.domain.ambient_dim


@dataclass(frozen=True)
class EpigraphHandle:
    spec: FunctionSpec
    kind: EpigraphKind = EpigraphKind.EPI


# -----------------------------
# Verdicts
# -----------------------------

@dataclass
class Witness:
    """
    Replayable refutation data. Points may carry a height as last coordinate
    (epigraph witnesses); `values` hold the evaluated quantities the replay
    compares against.
    """
    kind: WitnessKind
    points: List[List[float]]
    values: List[float]
    tolerance: float = 0.0
    note: str = ""
    breaks_convexity: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "points": [[float(c) for c in p] for p in self.points],
            "values": [float(v) for v in self.values],
            "tolerance": float(self.tolerance),
            "note": self.note,
            "breaks_convexity": self.breaks_convexity,
        }


@dataclass
class ConditionReport:
    condition: ConditionId
    status: Status
    witness: Optional[Witness] = None
    samples_used: int = 0
    notes: List[str] = field(default_factory=list)
    certificates: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class Verdict:
    overall: Status
    conditions: List[ConditionReport]
    mode: Mode
    seed: int
    tolerances: Tolerances = DEFAULT_TOLERANCES
    elapsed_ms: Optional[float] = None
    stats: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @staticmethod
    def from_conditions(
        conditions: List[ConditionReport],
        mode: Mode,
        seed: int,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "Verdict":
        overall = Status.combine([c.status for c in conditions])
        return Verdict(
            overall=overall,
            conditions=conditions,
            mode=mode,
            seed=seed,
            tolerances=tolerances,
        )

    def condition(self, condition: ConditionId) -> Optional[ConditionReport]:
        for report in self.conditions:
            if report.condition is condition:
                return report
        return None

    @property
    def first_failing(self) -> Optional[ConditionId]:
        for report in self.conditions:
            if report.status is Status.REFUTED:
                return report.condition
        return None

    @property
    def witness(self) -> Optional[Witness]:
        for report in self.conditions:
            if report.status is Status.REFUTED and report.witness is not None:
                return report.witness
        return None


# -----------------------------
# Oracle
# -----------------------------

@dataclass(frozen=True, eq=False)
class SampledBody:
    """
    A convex body known through generators and a membership predicate.
    `contains` maps an (m, n) array to a boolean mask.
    `kind` is "hull" (convex hull of generators), "region" or "slice".
    """
    generators: PointCloud
    hull: AffineSubspace
    contains: Callable[[np.ndarray], np.ndarray]
    kind: str = "hull"
    search_radius: float = 1.0


@dataclass
class CorpusEntry:
    name: str
    spec: FunctionSpec
    expected: Status
    expected_failing: Optional[ConditionId]
    provenance: str
    entry_id: str = ""
    record: Dict[str, str] = field(default_factory=dict)


@dataclass
class CrosscheckRow:
    entry: CorpusEntry
    verdicts: Dict[Mode, Verdict]
    disagreement: bool
    expectation_met: bool

    @property
    def statuses(self) -> Dict[Mode, Status]:
        return {mode: verdict.overall for mode, verdict in self.verdicts.items()}


@dataclass
class CrosscheckReport:
    rows: List[CrosscheckRow]
    seed: int

    @property
    def disagreements(self) -> int:
        return sum(1 for row in self.rows if row.disagreement)

    @property
    def expectation_mismatches(self) -> int:
        return sum(1 for row in self.rows if not row.expectation_met)

    @property
    def ok(self) -> bool:
        return self.disagreements == 0 and self.expectation_mismatches == 0


# -----------------------------
# CLI contract
# -----------------------------

@dataclass
class RunConfig:
    subcommand: str
    function: str = ""
    dim: int = 1
    constraints: List[str] = field(default_factory=list)
    affine: List[str] = field(default_factory=list)
    box: str = ""
    mode: str = config.DEFAULT_MODE
    samples: int = config.DEFAULT_SAMPLES
    lines: int = config.DEFAULT_LINES
    trials: int = config.DEFAULT_TRIALS
    seed: int = config.DEFAULT_SEED
    tolerances: Tolerances = DEFAULT_TOLERANCES
    json: bool = False
    timing: bool = False
    workers: int = 1
    corpus: Optional[str] = None
    csv: Optional[str] = None
