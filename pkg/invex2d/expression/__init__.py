from .nodes import (
    X1,
    X2,
    Add,
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
    Var,
    format_expression,
    free_variables,
    is_constant,
)
from .parser import parse_expression
from .calculus import differentiate, evaluate, evaluate_array, fold, is_affine
from .smooth import SmoothFunction, as_smooth
