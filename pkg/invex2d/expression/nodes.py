"""
  Expression tree for formulas over the two problem variables x1 and x2.

  Nodes are frozen dataclasses, so trees are immutable, hashable and compare
  structurally. Arithmetic operators build new trees, which keeps derivative
  rules readable.
"""

from dataclasses import dataclass
from typing import ClassVar, Union

Operand = Union["Expression", float, int]


class Expression:
    """Base class of all expression nodes."""

    # numpy scalars on the left defer to the reflected operators below
    __array_ufunc__ = None

    def __str__(self) -> str:
        return format_expression(self)

    def __add__(self, other: Operand) -> "Expression":
        return Add(self, _coerce(other))

    def __radd__(self, other: Operand) -> "Expression":
        return Add(_coerce(other), self)

    def __sub__(self, other: Operand) -> "Expression":
        return Sub(self, _coerce(other))

    def __rsub__(self, other: Operand) -> "Expression":
        return Sub(_coerce(other), self)

    def __mul__(self, other: Operand) -> "Expression":
        return Mul(self, _coerce(other))

    def __rmul__(self, other: Operand) -> "Expression":
        return Mul(_coerce(other), self)

    def __truediv__(self, other: Operand) -> "Expression":
        return Div(self, _coerce(other))

    def __rtruediv__(self, other: Operand) -> "Expression":
        return Div(_coerce(other), self)

    def __pow__(self, other: Operand) -> "Expression":
        return Pow(self, _coerce(other))

    def __neg__(self) -> "Expression":
        return Neg(self)


def _coerce(value: Operand) -> Expression:
    if isinstance(value, Expression):
        return value
    return Const(float(value))


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expression):
    index: int

    def __post_init__(self) -> None:
        if self.index not in (1, 2):
            raise ValueError(f"variable index must be 1 or 2, got {self.index}")


@dataclass(frozen=True, eq=True)
class UnaryOp(Expression):
    arg: Expression

    name: ClassVar[str] = ""


@dataclass(frozen=True, eq=True)
class Neg(UnaryOp):
    name: ClassVar[str] = "neg"


@dataclass(frozen=True, eq=True)
class Sin(UnaryOp):
    name: ClassVar[str] = "sin"


@dataclass(frozen=True, eq=True)
class Cos(UnaryOp):
    name: ClassVar[str] = "cos"


@dataclass(frozen=True, eq=True)
class Tan(UnaryOp):
    name: ClassVar[str] = "tan"


@dataclass(frozen=True, eq=True)
class Sqrt(UnaryOp):
    name: ClassVar[str] = "sqrt"


@dataclass(frozen=True, eq=True)
class Exp(UnaryOp):
    name: ClassVar[str] = "exp"


@dataclass(frozen=True, eq=True)
class Log(UnaryOp):
    name: ClassVar[str] = "log"


@dataclass(frozen=True, eq=True)
class BinaryOp(Expression):
    left: Expression
    right: Expression

    symbol: ClassVar[str] = ""


@dataclass(frozen=True, eq=True)
class Add(BinaryOp):
    symbol: ClassVar[str] = "+"


@dataclass(frozen=True, eq=True)
class Sub(BinaryOp):
    symbol: ClassVar[str] = "-"


@dataclass(frozen=True, eq=True)
class Mul(BinaryOp):
    symbol: ClassVar[str] = "*"


@dataclass(frozen=True, eq=True)
class Div(BinaryOp):
    symbol: ClassVar[str] = "/"


@dataclass(frozen=True, eq=True)
class Pow(BinaryOp):
    symbol: ClassVar[str] = "^"


FUNCTIONS: dict[str, type[UnaryOp]] = {
    "sin": Sin,
    "cos": Cos,
    "tan": Tan,
    "sqrt": Sqrt,
    "exp": Exp,
    "log": Log,
}

X1 = Var(1)
X2 = Var(2)


def format_expression(expr: Expression) -> str:
    """
    Render an expression as fully parenthesised text.

    The output parses back to a tree that is equal to the input after folding
    (negative constants come back as a negated literal).
    """
    match expr:
        case Const(value=value):
            text = repr(float(value))
            return f"({text})" if value < 0 else text
        case Var(index=index):
            return f"x{index}"
        case Neg(arg=arg):
            return f"(-{format_expression(arg)})"
        case UnaryOp(arg=arg):
            return f"{expr.name}({format_expression(arg)})"
        case BinaryOp(left=left, right=right):
            return f"({format_expression(left)} {expr.symbol} {format_expression(right)})"
    raise TypeError(f"not an expression node: {expr!r}")


def free_variables(expr: Expression) -> frozenset[int]:
    match expr:
        case Const():
            return frozenset()
        case Var(index=index):
            return frozenset({index})
        case UnaryOp(arg=arg):
            return free_variables(arg)
        case BinaryOp(left=left, right=right):
            return free_variables(left) | free_variables(right)
    raise TypeError(f"not an expression node: {expr!r}")


def is_constant(expr: Expression) -> bool:
    return not free_variables(expr)
