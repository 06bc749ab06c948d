import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.expression import (
    Add,
    Call,
    Div,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    evaluate,
    evaluate_many,
    parse,
    unparse,
)
from shared.errors import (
    EvaluationDomainError,
    ExpressionSyntaxError,
    InputError,
    UnknownIdentifierError,
    VariableIndexError,
)


# ----------------------------
# Parsing
# ----------------------------

def test_precedence_and_associativity():
    assert evaluate(parse("2 + 3 * x", 1), [2.0]) == 8.0
    assert evaluate(parse("2^3^2", 1), [0.0]) == 512.0
    assert evaluate(parse("-x^2", 1), [3.0]) == -9.0
    assert evaluate(parse("10 - 4 - 3", 1), [0.0]) == 3.0
    assert evaluate(parse("2^-1", 1), [0.0]) == 0.5


def test_aliases_and_indexed_variables():
    assert parse("x + y + z", 3) == parse("x1 + x2 + x3", 3)
    with pytest.raises(UnknownIdentifierError):
        # aliases stop at n = 3
        parse("x + x4", 4)


def test_example_function_value():
    f = parse("1/((1-x^2)*(1-y^2))", 2)
    assert evaluate(f, [0.0, 0.0]) == pytest.approx(1.0)
    assert evaluate(f, [0.5, 0.5]) == pytest.approx(1.0 / 0.5625)


def test_unicode_minus_is_accepted():
    assert evaluate(parse("1 − x", 1), [0.25]) == 0.75


@pytest.mark.parametrize(
    "src, n, error, position",
    [
        ("x + * 2", 1, ExpressionSyntaxError, 4),
        ("w + 1", 1, UnknownIdentifierError, 0),
        ("x + y", 1, VariableIndexError, 4),
        ("(x + 1", 1, ExpressionSyntaxError, 6),
        ("x $ 1", 1, ExpressionSyntaxError, 2),
    ],
)
def test_syntax_errors_carry_position(src, n, error, position):
    with pytest.raises(error) as info:
        parse(src, n)
    assert info.value.position == position
    assert "^" in info.value.diagnostic()


def test_empty_and_bad_dimension():
    with pytest.raises(ExpressionSyntaxError):
        parse("   ", 1)
    with pytest.raises(InputError):
        parse("x", 0)


# ----------------------------
# Evaluation
# ----------------------------

@pytest.mark.parametrize("src, point", [("log(x)", [0.0]), ("sqrt(x)", [-1.0]), ("1/x", [0.0]), ("x^0.5", [-2.0])])
def test_scalar_domain_errors_raise(src, point):
    with pytest.raises(EvaluationDomainError):
        evaluate(parse(src, 1), point)


def test_batch_evaluation_masks_domain_errors():
    values, ok = evaluate_many(parse("log(x)", 1), np.array([[1.0], [0.0], [-1.0], [math.e]]))
    assert ok.tolist() == [True, False, False, True]
    assert values[0] == 0.0 and values[3] == pytest.approx(1.0)
    assert np.isnan(values[1])


def test_overflow_is_not_ok():
    _, ok = evaluate_many(parse("exp(x)", 1), np.array([[1000.0]]))
    assert not ok[0]


def test_constant_broadcasts():
    values, ok = evaluate_many(parse("3", 2), np.zeros((4, 2)))
    assert values.tolist() == [3.0] * 4 and ok.all()


# ----------------------------
# Round trip
# ----------------------------

def _leaves(n: int):
    numbers = st.integers(min_value=0, max_value=800).map(lambda k: Num(k / 8))
    variables = st.integers(min_value=1, max_value=n).map(Var)
    return numbers | variables


def _trees(n: int):
    def extend(children):
        binary = st.sampled_from([Add, Sub, Mul, Div, Pow])
        return (
            st.builds(lambda op, a, b: op(a, b), binary, children, children)
            | children.map(Neg)
            | st.builds(Call, st.sampled_from(["exp", "log", "sqrt", "abs"]), children)
        )

    return st.recursive(_leaves(n), extend, max_leaves=12)


@given(_trees(3))
@settings(max_examples=200, deadline=None)
def test_unparse_reparses_to_the_same_tree(expr):
    assert parse(unparse(expr), 3) == expr
