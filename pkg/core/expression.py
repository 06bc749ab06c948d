"""
Expression grammar for f and for domain constraints.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right-associative
    atom   := number | variable | name '(' expr ')' | '(' expr ')'

Variables are x1..x12; x, y, z alias x1, x2, x3 when n <= 3.
"""

import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from shared.config import MAX_VARIABLES
from shared.errors import (
    EvaluationDomainError,
    ExpressionSyntaxError,
    InputError,
    UnknownIdentifierError,
    VariableIndexError,
)
from shared.logger import setup_logger

logger = setup_logger(__name__)


# -----------------------------
# AST
# -----------------------------

class Expr:
    """Base class of AST nodes. Nodes are immutable and compare structurally."""


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


FUNCTIONS = ("exp", "log", "sqrt", "abs")
ALIASES = {"x": 1, "y": 2, "z": 3}

BINARY_NODES = {"+": Add, "-": Sub, "*": Mul, "/": Div}
BINARY_SYMBOLS = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


# -----------------------------
# Tokenizer
# -----------------------------

@dataclass(frozen=True)
class Token:
    kind: str       # "num", "ident", "op", "end"
    text: str
    position: int


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

# Unicode minus signs appear when formulas are pasted from documents
_MINUS_VARIANTS = {"−": "-", "–": "-"}


def tokenize(source: str) -> List[Token]:
    text = "".join(_MINUS_VARIANTS.get(c, c) for c in source)
    tokens: List[Token] = []
    pos = 0

    while pos < len(text):
        c = text[pos]
        if c.isspace():
            pos += 1
            continue

        match = _NUMBER.match(text, pos)
        if match:
            tokens.append(Token("num", match.group(0), pos))
            pos = match.end()
            continue

        match = _IDENT.match(text, pos)
        if match:
            tokens.append(Token("ident", match.group(0), pos))
            pos = match.end()
            continue

        if c in "+-*/^(),;":
            tokens.append(Token("op", c, pos))
            pos += 1
            continue

        raise ExpressionSyntaxError(f"Unexpected character {c!r} at position {pos}", pos, source)

    tokens.append(Token("end", "", len(text)))
    return tokens


# -----------------------------
# Parser
# -----------------------------

class _Parser:
    def __init__(self, source: str, n: int):
        self.source = source
        self.n = n
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: Token, cls=ExpressionSyntaxError):
        return cls(f"{message} at position {token.position}", token.position, self.source)

    def expect(self, text: str) -> Token:
        token = self.advance()
        if token.text != text or token.kind != "op":
            found = token.text or "end of input"
            raise self.error(f"Expected {text!r}, found {found!r}", token)
        return token

    def parse(self) -> Expr:
        expr = self.expression()
        token = self.peek()
        if token.kind != "end":
            raise self.error(f"Unexpected token {token.text!r}", token)
        return expr

    def expression(self) -> Expr:
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            left = BINARY_NODES[op](left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            left = BINARY_NODES[op](left, self.unary())
        return left

    def unary(self) -> Expr:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        token = self.peek()
        if token.kind == "op" and token.text == "^":
            self.advance()
            # exponent re-enters at unary level: 2^-x and a^b^c = a^(b^c)
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        token = self.advance()

        if token.kind == "num":
            return Num(float(token.text))

        if token.kind == "ident":
            name = token.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return Call(name, arg)
            return Var(self.variable_index(token))

        if token.kind == "op" and token.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner

        found = token.text or "end of input"
        raise self.error(f"Unexpected {found!r}", token)

    def variable_index(self, token: Token) -> int:
        name = token.text
        if name in ALIASES and self.n <= 3:
            index = ALIASES[name]
        elif re.fullmatch(r"x([1-9]\d*)", name):
            index = int(name[1:])
            if index > MAX_VARIABLES:
                raise self.error(f"Variable {name} exceeds x{MAX_VARIABLES}", token, VariableIndexError)
        else:
            raise self.error(f"Unknown identifier {name!r}", token, UnknownIdentifierError)

        if index > self.n:
            raise self.error(
                f"Variable {name} has index {index} but dimension is {self.n}",
                token,
                VariableIndexError,
            )
        return index


def parse(src: str, n: int) -> Expr:
    """
    Parses `src` into an AST over variables x1..xn.
    Raises ExpressionSyntaxError (with position) on malformed input.
    """
    if n < 1:
        raise InputError(f"Dimension must be >= 1, got {n}")
    if n > MAX_VARIABLES:
        raise InputError(f"Dimension must be <= {MAX_VARIABLES}, got {n}")
    if not src or not src.strip():
        raise ExpressionSyntaxError("Empty expression", 0, src)
    return _Parser(src, n).parse()


def unparse(expr: Expr) -> str:
    """
    Fully parenthesized text that reparses to a structurally identical AST.
    """
    if isinstance(expr, Num):
        return repr(float(expr.value))
    if isinstance(expr, Var):
        return f"x{expr.index}"
    if isinstance(expr, Neg):
        return f"(-{unparse(expr.arg)})"
    if isinstance(expr, Call):
        return f"{expr.name}({unparse(expr.arg)})"
    if isinstance(expr, Pow):
        return f"({unparse(expr.base)} ^ {unparse(expr.exponent)})"
    symbol = BINARY_SYMBOLS[type(expr)]
    return f"({unparse(expr.left)} {symbol} {unparse(expr.right)})"


def walk(expr: Expr) -> Iterator[Expr]:
    yield expr
    for child in children(expr):
        yield from walk(child)


def children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, (Num, Var)):
        return ()
    if isinstance(expr, (Neg, Call)):
        return (expr.arg,)
    if isinstance(expr, Pow):
        return (expr.base, expr.exponent)
    return (expr.left, expr.right)


def max_variable_index(expr: Expr) -> int:
    return max((node.index for node in walk(expr) if isinstance(node, Var)), default=0)


def integer_exponent(expr: Pow) -> Optional[int]:
    """The exponent as an int when it is an integral literal, else None."""
    exponent = expr.exponent
    if isinstance(exponent, Num) and float(exponent.value).is_integer():
        return int(exponent.value)
    if isinstance(exponent, Neg) and isinstance(exponent.arg, Num) and float(exponent.arg.value).is_integer():
        return -int(exponent.arg.value)
    return None


# -----------------------------
# Evaluation
# -----------------------------

def evaluate_many(expr: Expr, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluates the AST on every row of `points` (shape (m, n)).

    Returns (values, ok): `ok[i]` is False where evaluation hit a domain error
    or overflowed; values at those rows are NaN and must not be used.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    with np.errstate(all="ignore"):
        values, ok = _evaluate(expr, points)
        values = np.broadcast_to(values, (points.shape[0],)).astype(float, copy=True)
        ok = np.broadcast_to(ok, (points.shape[0],)).copy()
        ok &= np.isfinite(values)
    values[~ok] = np.nan
    return values, ok


def evaluate(expr: Expr, point) -> float:
    """
    Scalar evaluation. Raises EvaluationDomainError instead of returning NaN/Inf.
    """
    row = np.asarray(point, dtype=float).reshape(1, -1)
    values, ok = evaluate_many(expr, row)
    if not ok[0]:
        raise EvaluationDomainError(f"Expression {unparse(expr)} is undefined at {row[0].tolist()}")
    return float(values[0])


def _evaluate(expr: Expr, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    m = X.shape[0]

    if isinstance(expr, Num):
        return np.full(m, float(expr.value)), np.ones(m, dtype=bool)

    if isinstance(expr, Var):
        if expr.index > X.shape[1]:
            raise InputError(f"Point has dimension {X.shape[1]}, expression uses x{expr.index}")
        return X[:, expr.index - 1].copy(), np.ones(m, dtype=bool)

    if isinstance(expr, Neg):
        a, ok = _evaluate(expr.arg, X)
        return -a, ok

    if isinstance(expr, Call):
        a, ok = _evaluate(expr.arg, X)
        if expr.name == "exp":
            return np.exp(a), ok
        if expr.name == "log":
            ok = ok & (a > 0)
            return np.log(np.where(a > 0, a, 1.0)), ok
        if expr.name == "sqrt":
            ok = ok & (a >= 0)
            return np.sqrt(np.where(a >= 0, a, 0.0)), ok
        if expr.name == "abs":
            return np.abs(a), ok
        raise InputError(f"Unknown function {expr.name}")

    if isinstance(expr, Pow):
        a, ok_a = _evaluate(expr.base, X)
        p = integer_exponent(expr)
        if p is not None:
            if p < 0:
                ok_a = ok_a & (a != 0)
                a = np.where(a != 0, a, 1.0)
            return np.power(a, float(p)), ok_a
        b, ok_b = _evaluate(expr.exponent, X)
        # real exponent: positive base only
        ok = ok_a & ok_b & (a > 0)
        return np.power(np.where(a > 0, a, 1.0), b), ok

    a, ok_a = _evaluate(expr.left, X)
    b, ok_b = _evaluate(expr.right, X)
    ok = ok_a & ok_b
    if isinstance(expr, Add):
        return a + b, ok
    if isinstance(expr, Sub):
        return a - b, ok
    if isinstance(expr, Mul):
        return a * b, ok
    if isinstance(expr, Div):
        ok = ok & (b != 0)
        return a / np.where(b != 0, b, 1.0), ok

    raise InputError(f"Unknown expression node {type(expr).__name__}")
