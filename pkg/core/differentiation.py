"""
Second-order forward-mode differentiation on the expression AST.

Every node is evaluated to a jet (value, gradient, Hessian); composition
follows the chain rule

    phi(u):  g = phi'(u) g_u,   H = phi'(u) H_u + phi''(u) g_u g_u^T
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.expression import (
    Add, Call, Div, Expr, Mul, Neg, Num, Pow, Sub, Var,
    integer_exponent, unparse,
)
from shared.errors import EvaluationDomainError, InputError, NondifferentiableError
from shared.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class Jet:
    value: float
    grad: np.ndarray
    hess: np.ndarray

    @staticmethod
    def constant(value: float, n: int) -> "Jet":
        return Jet(float(value), np.zeros(n), np.zeros((n, n)))

    @staticmethod
    def variable(value: float, index: int, n: int) -> "Jet":
        grad = np.zeros(n)
        grad[index] = 1.0
        return Jet(float(value), grad, np.zeros((n, n)))

    def apply(self, d0: float, d1: float, d2: float) -> "Jet":
        """Chain rule for a scalar function with phi=d0, phi'=d1, phi''=d2 at self.value."""
        return Jet(
            d0,
            d1 * self.grad,
            d1 * self.hess + d2 * np.outer(self.grad, self.grad),
        )


def jet(expr: Expr, point) -> Jet:
    """Value, gradient and Hessian of `expr` at `point`."""
    v = np.asarray(point, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise InputError(f"Point has non-finite coordinates: {v.tolist()}")
    try:
        with np.errstate(all="ignore"):
            result = _jet(expr, v)
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvaluationDomainError(f"Derivatives of {unparse(expr)} undefined at {v.tolist()}: {exc}") from exc
    if not (np.isfinite(result.value) and np.all(np.isfinite(result.grad)) and np.all(np.isfinite(result.hess))):
        raise EvaluationDomainError(f"Derivatives of {unparse(expr)} overflow at {v.tolist()}")
    return result


def gradient(expr: Expr, point) -> np.ndarray:
    return jet(expr, point).grad


def hessian(expr: Expr, point) -> np.ndarray:
    H = jet(expr, point).hess
    # symmetric by construction; averaging removes last-bit asymmetry
    return 0.5 * (H + H.T)


def _jet(expr: Expr, v: np.ndarray) -> Jet:
    n = v.shape[0]

    if isinstance(expr, Num):
        return Jet.constant(expr.value, n)

    if isinstance(expr, Var):
        if expr.index > n:
            raise InputError(f"Point has dimension {n}, expression uses x{expr.index}")
        return Jet.variable(v[expr.index - 1], expr.index - 1, n)

    if isinstance(expr, Neg):
        a = _jet(expr.arg, v)
        return Jet(-a.value, -a.grad, -a.hess)

    if isinstance(expr, Call):
        return _call(expr, _jet(expr.arg, v), v)

    if isinstance(expr, Pow):
        return _pow(expr, v)

    a = _jet(expr.left, v)
    b = _jet(expr.right, v)

    if isinstance(expr, Add):
        return Jet(a.value + b.value, a.grad + b.grad, a.hess + b.hess)
    if isinstance(expr, Sub):
        return Jet(a.value - b.value, a.grad - b.grad, a.hess - b.hess)
    if isinstance(expr, Mul):
        return _product(a, b)
    if isinstance(expr, Div):
        if b.value == 0:
            raise EvaluationDomainError(f"Division by zero in {unparse(expr)} at {v.tolist()}")
        inv = 1.0 / b.value
        return _product(a, b.apply(inv, -inv * inv, 2.0 * inv ** 3))

    raise InputError(f"Unknown expression node {type(expr).__name__}")


def _product(a: Jet, b: Jet) -> Jet:
    cross = np.outer(a.grad, b.grad)
    return Jet(
        a.value * b.value,
        a.value * b.grad + b.value * a.grad,
        a.value * b.hess + b.value * a.hess + cross + cross.T,
    )


def _call(expr: Call, a: Jet, v: np.ndarray) -> Jet:
    u = a.value
    if expr.name == "exp":
        e = float(np.exp(u))
        return a.apply(e, e, e)
    if expr.name == "log":
        if u <= 0:
            raise EvaluationDomainError(f"log of non-positive value {u} at {v.tolist()}")
        return a.apply(float(np.log(u)), 1.0 / u, -1.0 / (u * u))
    if expr.name == "sqrt":
        if u < 0:
            raise EvaluationDomainError(f"sqrt of negative value {u} at {v.tolist()}")
        if u == 0:
            raise NondifferentiableError(f"sqrt is not differentiable at 0 ({v.tolist()})")
        s = float(np.sqrt(u))
        return a.apply(s, 0.5 / s, -0.25 / (s * u))
    if expr.name == "abs":
        if u == 0:
            raise NondifferentiableError(f"abs is not differentiable at 0 ({v.tolist()})")
        sign = 1.0 if u > 0 else -1.0
        return a.apply(abs(u), sign, 0.0)
    raise InputError(f"Unknown function {expr.name}")


def _pow(expr: Pow, v: np.ndarray) -> Jet:
    a = _jet(expr.base, v)
    u = a.value
    p = integer_exponent(expr)

    if p is not None:
        if p == 0:
            return Jet.constant(1.0, v.shape[0])
        if p < 0 and u == 0:
            raise EvaluationDomainError(f"Division by zero in {unparse(expr)} at {v.tolist()}")
        d0 = u ** p
        d1 = p * u ** (p - 1)
        d2 = p * (p - 1) * u ** (p - 2) if p != 1 else 0.0
        return a.apply(float(d0), float(d1), float(d2))

    b = _jet(expr.exponent, v)
    if u <= 0:
        raise EvaluationDomainError(f"Non-integer power of non-positive base {u} at {v.tolist()}")

    if isinstance(expr.exponent, Num) or (not np.any(b.grad) and not np.any(b.hess)):
        q = b.value
        return a.apply(float(u ** q), float(q * u ** (q - 1)), float(q * (q - 1) * u ** (q - 2)))

    # a^b = exp(b log a)
    log_a = a.apply(float(np.log(u)), 1.0 / u, -1.0 / (u * u))
    exponent = _product(b, log_a)
    e = float(np.exp(exponent.value))
    return exponent.apply(e, e, e)


def directional_second_derivative(expr: Expr, point, direction) -> float:
    H = hessian(expr, point)
    d = np.asarray(direction, dtype=float)
    return float(d @ H @ d)


def hessian_in_subspace(expr: Expr, point, basis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hessian restricted to the rows of `basis` (orthonormal directions) and
    its eigen-decomposition, eigenvalues ascending.
    """
    H = hessian(expr, point)
    reduced = basis @ H @ basis.T
    eigenvalues, eigenvectors = np.linalg.eigh(reduced)
    return eigenvalues, eigenvectors
