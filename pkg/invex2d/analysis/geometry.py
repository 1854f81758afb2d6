"""
  Planar vector primitives: the two-dimensional cross product, tangent
  vectors of constraint curves and directional derivatives.

  The sign of cross(grad f, grad g) at a point of {g = 0} tells whether f
  decreases (positive) or increases (negative) when moving along the curve in
  its positive direction (-g_x2, g_x1).
"""

import math
from typing import NamedTuple, Sequence

import numpy as np

from invex2d.exceptions import DegenerateGradientError
from invex2d.expression import Expression, SmoothFunction, as_smooth

DEFAULT_GRADIENT_TOLERANCE = 1e-9


class Vec2(NamedTuple):
    x1: float
    x2: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Vec2":
        x1, x2 = float(values[0]), float(values[1])
        if not (math.isfinite(x1) and math.isfinite(x2)):
            raise ValueError(f"non-finite vector components ({x1}, {x2})")
        return cls(x1, x2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])


Point2 = Vec2


def cross(u: Sequence[float], v: Sequence[float]) -> float:
    """2D cross product u.x1*v.x2 - u.x2*v.x1 (antisymmetric)."""
    return float(u[0]) * float(v[1]) - float(u[1]) * float(v[0])


def tangent_from_gradient(gradient: Sequence[float]) -> np.ndarray:
    return np.array([-float(gradient[1]), float(gradient[0])])


def tangent_vector(
    g: Expression | SmoothFunction,
    y: Sequence[float],
    gradient_tolerance: float = DEFAULT_GRADIENT_TOLERANCE,
) -> np.ndarray:
    """
    Positive-direction tangent (-dg/dx2, dg/dx1) of the curve g = 0 at y.

    The tangent is not normalised.

    :raises DegenerateGradientError: |grad g(y)| below the gradient tolerance
    """
    gradient = as_smooth(g).gradient(y)
    norm = float(np.linalg.norm(gradient))
    if norm < gradient_tolerance:
        raise DegenerateGradientError(y, norm)
    return tangent_from_gradient(gradient)


def unit_tangent(
    g: Expression | SmoothFunction,
    y: Sequence[float],
    gradient_tolerance: float = DEFAULT_GRADIENT_TOLERANCE,
) -> np.ndarray:
    t = tangent_vector(g, y, gradient_tolerance)
    return t / np.linalg.norm(t)


def directional_derivative(f: Expression | SmoothFunction, x: Sequence[float], u: Sequence[float]) -> float:
    return float(np.dot(as_smooth(f).gradient(x), np.asarray(u, dtype=float)))
