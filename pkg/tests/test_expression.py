import math

import numpy as np
import pytest

from invex2d.exceptions import EvaluationDomainError, ExpressionSyntaxError, UnknownIdentifierError
from invex2d.expression import (
    X1,
    X2,
    Const,
    Cos,
    Exp,
    Neg,
    Pow,
    Sin,
    SmoothFunction,
    differentiate,
    evaluate,
    evaluate_array,
    fold,
    format_expression,
    is_affine,
    parse_expression,
)


@pytest.mark.parametrize(
    "text, point, expected",
    [
        ("x1 + 2*x2^2", (1.0, 2.0), 9.0),
        ("-x1^2", (3.0, 0.0), -9.0),
        ("2^3^2", (0.0, 0.0), 512.0),
        ("x1**2 - x2", (2.0, 1.0), 3.0),
        ("(x1 - 1) / (x2 + 1)", (3.0, 1.0), 1.0),
        ("sin(x1) + cos(x2)", (0.0, 0.0), 1.0),
        ("exp(log(x1)) * sqrt(x2)", (2.0, 9.0), 6.0),
        ("1.5e-1 * x1", (10.0, 0.0), 1.5),
    ],
)
def test_parse_and_evaluate(text, point, expected):
    assert evaluate(parse_expression(text), point) == pytest.approx(expected, rel=1e-12)


def test_unary_minus_binds_looser_than_power():
    assert parse_expression("-x1^2") == Neg(Pow(X1, Const(2.0)))


@pytest.mark.parametrize("text, position", [("x1 $ 2", 3), ("x1 +", 4), ("(x1", 3), ("x1 x2", 3)])
def test_syntax_error_carries_position(text, position):
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse_expression(text)
    assert excinfo.value.position == position


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as excinfo:
        parse_expression("x3 + 1")
    assert excinfo.value.name == "x3"
    assert excinfo.value.position == 0


@pytest.mark.parametrize("text, point", [("sqrt(x1)", (-1.0, 0.0)), ("log(x1)", (0.0, 0.0)), ("1 / x1", (0.0, 1.0))])
def test_domain_errors(text, point):
    with pytest.raises(EvaluationDomainError):
        evaluate(parse_expression(text), point)


def test_evaluate_array_marks_domain_violations_non_finite():
    values = evaluate_array(parse_expression("log(x1)"), np.array([-1.0, 1.0]), np.array([0.0, 0.0]))
    assert math.isnan(values[0])
    assert values[1] == 0.0


@pytest.mark.parametrize(
    "text",
    ["sin(x1*x2)", "exp(x1) / (1 + x2^2)", "sqrt(x1^2 + x2^2 + 1)", "x1^2.5 * x2", "tan(x1 - x2) + log(x1)"],
)
def test_derivatives_match_central_differences(text):
    expr = parse_expression(text)
    point = np.array([0.7, -0.4])
    h = 1e-6
    for var, unit in ((1, np.array([h, 0.0])), (2, np.array([0.0, h]))):
        numeric = (evaluate(expr, point + unit) - evaluate(expr, point - unit)) / (2 * h)
        assert evaluate(differentiate(expr, var), point) == pytest.approx(numeric, rel=1e-6, abs=1e-8)


def test_smooth_function_hessian_is_symmetric_and_exact():
    f = SmoothFunction.from_expression(parse_expression("x1^2 * x2 + 3*x2^2"))
    np.testing.assert_allclose(f.gradient((1.0, 2.0)), [4.0, 13.0])
    np.testing.assert_allclose(f.hessian((1.0, 2.0)), [[4.0, 2.0], [2.0, 6.0]])


def test_fold_removes_identities():
    assert fold(parse_expression("0*x1 + 1*x2 - 0")) == X2
    assert fold(parse_expression("2 * 3 + x1^1")) == fold(6 + X1)


@pytest.mark.parametrize(
    "text",
    ["-(x1 - 2)^2 - (x2 + 0.5)^2", "sin(x1) * exp(-x2) / (1 + x1^2)", "x1^-2 + 1e-10", "2.25 - (x1 + 1)^2 - x2^2"],
)
def test_format_reparses_to_equal_tree(text):
    expr = fold(parse_expression(text))
    assert fold(parse_expression(format_expression(expr))) == expr


@pytest.mark.parametrize("text, expected", [("2*x1 - 3*x2 + 1", True), ("x1*x2", False), ("x1^2", False), ("7", True)])
def test_is_affine(text, expected):
    assert is_affine(parse_expression(text)) is expected


def test_operator_overloads_build_trees():
    e = 2 * X1 - X2 / 4
    assert evaluate(e, (1.0, 4.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("text, expected", [("x1^-2", 0.25), ("x1^(-3)", -0.125), ("x1^(1+1)", 4.0), ("x1^(6/2)", -8.0)])
def test_integer_powers_of_negative_bases(text, expected):
    expr = parse_expression(text)
    assert evaluate(expr, (-2.0, 0.0)) == expected
    assert evaluate_array(expr, np.array([-2.0]), np.array([0.0]))[0] == expected


def test_fractional_power_of_negative_base_is_a_domain_error():
    with pytest.raises(EvaluationDomainError):
        evaluate(parse_expression("x1^(1/2)"), (-2.0, 0.0))
    assert math.isnan(evaluate_array(parse_expression("x1^0.5"), np.array([-2.0]), np.array([0.0]))[0])


def test_derivative_of_negative_integer_power():
    derivative = differentiate(parse_expression("x1^-2"), 1)
    assert evaluate(derivative, (-2.0, 0.0)) == pytest.approx(0.25)


def _random_expression(rng, depth):
    """Random tree that is finite and smooth on [-1, 1]^2."""
    if depth == 0 or rng.uniform() < 0.2:
        return X1 if rng.uniform() < 0.4 else X2 if rng.uniform() < 0.6 else Const(float(rng.uniform(-2.0, 2.0)))
    match int(rng.integers(7)):
        case 0:
            return _random_expression(rng, depth - 1) + _random_expression(rng, depth - 1)
        case 1:
            return _random_expression(rng, depth - 1) - _random_expression(rng, depth - 1)
        case 2:
            return _random_expression(rng, depth - 1) * _random_expression(rng, depth - 1)
        case 3:
            return _random_expression(rng, depth - 1) / (1 + _random_expression(rng, depth - 1) ** 2)
        case 4:
            return _random_expression(rng, depth - 1) ** int(rng.integers(0, 4)) if depth > 1 else X1**2
        case 5:
            return Sin(_random_expression(rng, depth - 1))
        case _:
            return Exp(Cos(_random_expression(rng, depth - 1)))


def test_random_derivatives_match_central_differences(rng):
    h = 1e-6
    for _ in range(1000):
        expr = _random_expression(rng, 3)
        point = rng.uniform(-1.0, 1.0, size=2)
        for var, unit in ((1, np.array([h, 0.0])), (2, np.array([0.0, h]))):
            numeric = (evaluate(expr, point + unit) - evaluate(expr, point - unit)) / (2 * h)
            exact = evaluate(differentiate(expr, var), point)
            scale = 1.0 + abs(exact) + abs(evaluate(expr, point))
            assert abs(numeric - exact) <= 1e-5 * scale, str(expr)


def test_fold_commutes_with_differentiation(rng):
    for _ in range(200):
        expr = _random_expression(rng, 3)
        point = rng.uniform(-1.0, 1.0, size=2)
        for var in (1, 2):
            folded_first = evaluate(differentiate(fold(expr), var), point)
            unfolded = evaluate(differentiate(expr, var), point)
            assert folded_first == pytest.approx(unfolded, rel=1e-9, abs=1e-9)
