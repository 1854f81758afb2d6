from dataclasses import dataclass
from typing import Sequence

import numpy as np

from invex2d.expression.calculus import differentiate, evaluate, evaluate_array, fold
from invex2d.expression.nodes import Expression


@dataclass(frozen=True)
class SmoothFunction:
    """An expression together with its symbolic gradient and Hessian."""

    expression: Expression
    gradient_expressions: tuple[Expression, Expression]
    hessian_expressions: tuple[Expression, Expression, Expression]  # d11, d12, d22

    @classmethod
    def from_expression(cls, expression: Expression) -> "SmoothFunction":
        expression = fold(expression)
        d1 = differentiate(expression, 1)
        d2 = differentiate(expression, 2)
        d11 = differentiate(d1, 1)
        d12 = differentiate(d1, 2)
        d22 = differentiate(d2, 2)
        return cls(expression, (d1, d2), (d11, d12, d22))

    def value(self, x: Sequence[float]) -> float:
        return evaluate(self.expression, x)

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        d1, d2 = self.gradient_expressions
        return np.array([evaluate(d1, x), evaluate(d2, x)])

    def hessian(self, x: Sequence[float]) -> np.ndarray:
        d11, d12, d22 = self.hessian_expressions
        h12 = evaluate(d12, x)
        return np.array([[evaluate(d11, x), h12], [h12, evaluate(d22, x)]])

    def values(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return evaluate_array(self.expression, x1, x2)

    def gradients(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Gradients on coordinate arrays, shape (..., 2)."""
        d1, d2 = self.gradient_expressions
        return np.stack([evaluate_array(d1, x1, x2), evaluate_array(d2, x1, x2)], axis=-1)

    def hessians(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Hessians on coordinate arrays, shape (..., 2, 2)."""
        d11, d12, d22 = (evaluate_array(d, x1, x2) for d in self.hessian_expressions)
        return np.stack([np.stack([d11, d12], axis=-1), np.stack([d12, d22], axis=-1)], axis=-2)


def as_smooth(function: "Expression | SmoothFunction") -> SmoothFunction:
    if isinstance(function, SmoothFunction):
        return function
    return SmoothFunction.from_expression(function)
