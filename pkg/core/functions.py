from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from core.domain import build_domain
from core.expression import Expr, Neg, evaluate_many, parse, unparse
from shared.errors import EvaluationDomainError, InputError
from shared.logger import setup_logger
from shared.models import DomainSpec, FunctionSpec

logger = setup_logger(__name__)


@dataclass(frozen=True)
class GridFunction:
    """
    Piecewise-constant function of one variable: `levels[i]` on the interval
    (knots[i-1], knots[i]], with levels[0] left of the first knot and
    levels[-1] right of the last. Each knot takes the value of the interval
    it closes, so a jump up happens just right of a knot.
    """
    knots: Tuple[float, ...]
    levels: Tuple[float, ...]
    negated: bool = False

    def __post_init__(self):
        if len(self.levels) != len(self.knots) + 1:
            raise InputError("GridFunction needs exactly one more level than knots")
        if list(self.knots) != sorted(self.knots):
            raise InputError("GridFunction knots must be sorted")

    def evaluate_many(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        points = np.atleast_2d(points)
        index = np.searchsorted(np.asarray(self.knots), points[:, 0], side="left")
        values = np.asarray(self.levels, dtype=float)[index]
        if self.negated:
            values = -values
        return values, np.ones(points.shape[0], dtype=bool)


Field = Union[Expr, GridFunction]


def field_values(f: Field, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(values, ok) for an expression or a grid function."""
    if isinstance(f, GridFunction):
        return f.evaluate_many(points)
    return evaluate_many(f, points)


def field_value(f: Field, point) -> float:
    row = np.asarray(point, dtype=float).reshape(1, -1)
    values, ok = field_values(f, row)
    if not ok[0]:
        raise EvaluationDomainError(f"{describe_field(f)} is undefined at {row[0].tolist()}")
    return float(values[0])


def negate_field(f: Field) -> Field:
    if isinstance(f, GridFunction):
        return GridFunction(f.knots, f.levels, not f.negated)
    return Neg(f)


def is_expression(f: Field) -> bool:
    return isinstance(f, Expr)


def describe_field(f: Field) -> str:
    if isinstance(f, GridFunction):
        return f"grid function with {len(f.knots)} knots"
    return unparse(f)


def build_function_spec(
    src: str,
    n: int,
    constraints: Sequence[str] = (),
    box: str = "",
    affine: Sequence[str] = (),
) -> FunctionSpec:
    """Parses f and its domain into a FunctionSpec."""
    f = parse(src, n)
    domain = build_domain(n, constraints, box, affine)
    logger.info(
        f"Function spec built: f={unparse(f)}, n={n}, "
        f"constraints={len(domain.constraints)}, equalities={len(domain.equalities)}"
    )
    return FunctionSpec(f=f, domain=domain, source=src)


def with_field(spec: FunctionSpec, f: Field, source: str = "") -> FunctionSpec:
    return FunctionSpec(f=f, domain=spec.domain, source=source or describe_field(f))


def grid_function_spec(
    knots: Sequence[float],
    levels: Sequence[float],
    box: str,
) -> FunctionSpec:
    domain: DomainSpec = build_domain(1, (), box)
    grid = GridFunction(tuple(float(k) for k in knots), tuple(float(v) for v in levels))
    return FunctionSpec(f=grid, domain=domain, source=describe_field(grid))
