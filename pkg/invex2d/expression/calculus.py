import math
from functools import singledispatch
from typing import Sequence

import numpy as np

from invex2d.exceptions import EvaluationDomainError
from invex2d.expression.nodes import (
    Add,
    BinaryOp,
    Const,
    Cos,
    Div,
    Exp,
    Expression,
    Log,
    Mul,
    Neg,
    Pow,
    Sin,
    Sqrt,
    Sub,
    Tan,
    UnaryOp,
    Var,
    free_variables,
    is_constant,
)

# integer exponents up to this magnitude are evaluated by repeated multiplication
MAX_INTEGER_EXPONENT = 1024

_SCALAR_FUNCTIONS = {
    Sin: math.sin,
    Cos: math.cos,
    Tan: math.tan,
    Exp: math.exp,
}

_ARRAY_FUNCTIONS = {
    Neg: np.negative,
    Sin: np.sin,
    Cos: np.cos,
    Tan: np.tan,
    Sqrt: np.sqrt,
    Exp: np.exp,
    Log: np.log,
}


def integer_exponent(expr: Expression) -> int | None:
    """Return the exponent as int when it is a variable-free expression with an integer value."""
    if not is_constant(expr):
        return None
    try:
        value = _evaluate(expr, 0.0, 0.0)
    except EvaluationDomainError:
        return None
    if math.isfinite(value) and value.is_integer() and abs(value) <= MAX_INTEGER_EXPONENT:
        return int(value)
    return None


def _int_power(base, n: int):
    if n < 0:
        return 1.0 / _int_power(base, -n)
    result = base * 0.0 + 1.0
    factor = base
    while n:
        if n & 1:
            result = result * factor
        factor = factor * factor
        n >>= 1
    return result


def evaluate(expr: Expression, point: Sequence[float]) -> float:
    """
    Evaluate an expression at a point in IEEE double precision.

    :param expr: expression tree
    :param point: (x1, x2)
    :returns: value of the expression
    :raises EvaluationDomainError: log/sqrt of a negative number, division by zero, overflow
    """
    return _evaluate(expr, float(point[0]), float(point[1]))


def _evaluate(expr: Expression, x1: float, x2: float) -> float:
    match expr:
        case Const(value=value):
            return float(value)
        case Var(index=index):
            return x1 if index == 1 else x2
        case Neg(arg=arg):
            return -_evaluate(arg, x1, x2)
        case Sqrt(arg=arg):
            a = _evaluate(arg, x1, x2)
            if a < 0:
                raise EvaluationDomainError(f"sqrt of negative value {a}", expr)
            return math.sqrt(a)
        case Log(arg=arg):
            a = _evaluate(arg, x1, x2)
            if a <= 0:
                raise EvaluationDomainError(f"log of non-positive value {a}", expr)
            return math.log(a)
        case UnaryOp(arg=arg):
            a = _evaluate(arg, x1, x2)
            try:
                return _SCALAR_FUNCTIONS[type(expr)](a)
            except OverflowError:
                raise EvaluationDomainError(f"overflow in {expr.name}({a})", expr) from None
        case Add(left=left, right=right):
            return _evaluate(left, x1, x2) + _evaluate(right, x1, x2)
        case Sub(left=left, right=right):
            return _evaluate(left, x1, x2) - _evaluate(right, x1, x2)
        case Mul(left=left, right=right):
            return _evaluate(left, x1, x2) * _evaluate(right, x1, x2)
        case Div(left=left, right=right):
            denominator = _evaluate(right, x1, x2)
            if denominator == 0.0:
                raise EvaluationDomainError("division by zero", expr)
            return _evaluate(left, x1, x2) / denominator
        case Pow(left=left, right=right):
            base = _evaluate(left, x1, x2)
            n = integer_exponent(right)
            if n is not None:
                if n < 0 and base == 0.0:
                    raise EvaluationDomainError("zero raised to a negative power", expr)
                return _int_power(base, n)
            exponent = _evaluate(right, x1, x2)
            if base < 0.0 or (base == 0.0 and exponent < 0.0):
                raise EvaluationDomainError(f"{base} raised to power {exponent}", expr)
            try:
                return math.pow(base, exponent)
            except OverflowError:
                raise EvaluationDomainError(f"overflow in {base}^{exponent}", expr) from None
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate_array(expr: Expression, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """
    Evaluate an expression elementwise on coordinate arrays.

    Points outside the natural domain yield nan or inf instead of raising.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    with np.errstate(all="ignore"):
        return np.broadcast_to(_evaluate_array(expr, x1, x2), np.broadcast(x1, x2).shape).astype(float)


def _evaluate_array(expr: Expression, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    match expr:
        case Const(value=value):
            return np.full(np.broadcast(x1, x2).shape, float(value))
        case Var(index=index):
            return x1 if index == 1 else x2
        case UnaryOp(arg=arg):
            return _ARRAY_FUNCTIONS[type(expr)](_evaluate_array(arg, x1, x2))
        case Add(left=left, right=right):
            return _evaluate_array(left, x1, x2) + _evaluate_array(right, x1, x2)
        case Sub(left=left, right=right):
            return _evaluate_array(left, x1, x2) - _evaluate_array(right, x1, x2)
        case Mul(left=left, right=right):
            return _evaluate_array(left, x1, x2) * _evaluate_array(right, x1, x2)
        case Div(left=left, right=right):
            return _evaluate_array(left, x1, x2) / _evaluate_array(right, x1, x2)
        case Pow(left=left, right=right):
            base = _evaluate_array(left, x1, x2)
            n = integer_exponent(right)
            if n is not None:
                return _int_power(base, n)
            return np.power(base, _evaluate_array(right, x1, x2))
    raise TypeError(f"not an expression node: {expr!r}")


def _is(expr: Expression, value: float) -> bool:
    return isinstance(expr, Const) and expr.value == value


def _folded_constant(expr: Expression) -> Expression:
    try:
        value = _evaluate(expr, 0.0, 0.0)
    except EvaluationDomainError:
        return expr
    return Const(value) if math.isfinite(value) else expr


def fold(expr: Expression) -> Expression:
    """
    Constant folding and identity elimination (0*e, 1*e, e+0, e-0, e/1, e^1, e^0).

    No other simplification is attempted.
    """
    match expr:
        case Const() | Var():
            return expr
        case UnaryOp(arg=arg):
            a = fold(arg)
            if isinstance(expr, Neg) and isinstance(a, Neg):
                return a.arg
            folded = type(expr)(a)
            return _folded_constant(folded) if isinstance(a, Const) else folded
        case BinaryOp(left=left, right=right):
            lhs, rhs = fold(left), fold(right)
            folded = type(expr)(lhs, rhs)
            if isinstance(lhs, Const) and isinstance(rhs, Const):
                return _folded_constant(folded)
            match folded:
                case Add():
                    if _is(lhs, 0.0):
                        return rhs
                    if _is(rhs, 0.0):
                        return lhs
                case Sub():
                    if _is(rhs, 0.0):
                        return lhs
                    if _is(lhs, 0.0):
                        return fold(Neg(rhs))
                case Mul():
                    if _is(lhs, 0.0) or _is(rhs, 0.0):
                        return Const(0.0)
                    if _is(lhs, 1.0):
                        return rhs
                    if _is(rhs, 1.0):
                        return lhs
                case Div():
                    if _is(lhs, 0.0):
                        return Const(0.0)
                    if _is(rhs, 1.0):
                        return lhs
                case Pow():
                    if _is(rhs, 1.0):
                        return lhs
                    if _is(rhs, 0.0):
                        return Const(1.0)
            return folded
    raise TypeError(f"not an expression node: {expr!r}")


@singledispatch
def _derivative(expr: Expression, var: int) -> Expression:
    raise NotImplementedError(f"Cannot differentiate a {type(expr).__name__}")


@_derivative.register
def _(expr: Const, var: int) -> Expression:
    return Const(0.0)


@_derivative.register
def _(expr: Var, var: int) -> Expression:
    return Const(1.0) if expr.index == var else Const(0.0)


@_derivative.register
def _(expr: Neg, var: int) -> Expression:
    return Neg(_derivative(expr.arg, var))


@_derivative.register
def _(expr: Sin, var: int) -> Expression:
    return Mul(_derivative(expr.arg, var), Cos(expr.arg))


@_derivative.register
def _(expr: Cos, var: int) -> Expression:
    return Neg(Mul(_derivative(expr.arg, var), Sin(expr.arg)))


@_derivative.register
def _(expr: Tan, var: int) -> Expression:
    return Div(_derivative(expr.arg, var), Pow(Cos(expr.arg), Const(2.0)))


@_derivative.register
def _(expr: Sqrt, var: int) -> Expression:
    return Div(_derivative(expr.arg, var), Mul(Const(2.0), expr))


@_derivative.register
def _(expr: Exp, var: int) -> Expression:
    return Mul(_derivative(expr.arg, var), expr)


@_derivative.register
def _(expr: Log, var: int) -> Expression:
    return Div(_derivative(expr.arg, var), expr.arg)


@_derivative.register
def _(expr: Add, var: int) -> Expression:
    return Add(_derivative(expr.left, var), _derivative(expr.right, var))


@_derivative.register
def _(expr: Sub, var: int) -> Expression:
    return Sub(_derivative(expr.left, var), _derivative(expr.right, var))


@_derivative.register
def _(expr: Mul, var: int) -> Expression:
    """Product rule."""
    u, v = expr.left, expr.right
    return Add(Mul(_derivative(u, var), v), Mul(u, _derivative(v, var)))


@_derivative.register
def _(expr: Div, var: int) -> Expression:
    """Quotient rule."""
    u, v = expr.left, expr.right
    numerator = Sub(Mul(_derivative(u, var), v), Mul(u, _derivative(v, var)))
    return Div(numerator, Pow(v, Const(2.0)))


@_derivative.register
def _(expr: Pow, var: int) -> Expression:
    base, exponent = expr.left, expr.right
    if var not in free_variables(exponent):
        # power rule, exponent constant with respect to var
        reduced = fold(Sub(exponent, Const(1.0)))
        return Mul(_derivative(base, var), Mul(exponent, Pow(base, reduced)))
    # d(u^v) = u^v * (v' log u + v u' / u)
    return Mul(
        expr,
        Add(
            Mul(_derivative(exponent, var), Log(base)),
            Div(Mul(exponent, _derivative(base, var)), base),
        ),
    )


def differentiate(expr: Expression, var: int) -> Expression:
    """
    Exact symbolic partial derivative, constant-folded.

    :param expr: expression tree
    :param var: variable index, 1 or 2
    :returns: folded derivative expression
    """
    if var not in (1, 2):
        raise ValueError(f"variable index must be 1 or 2, got {var}")
    return fold(_derivative(expr, var))


def is_affine(expr: Expression) -> bool:
    """True when both partial derivatives fold to variable-free expressions."""
    for i in (1, 2):
        first = differentiate(expr, i)
        if not is_constant(first):
            return False
    return True
