import numpy as np
import pytest

from invex2d.analysis.geometry import Vec2, cross, directional_derivative, tangent_vector, unit_tangent
from invex2d.exceptions import DegenerateGradientError
from invex2d.expression import X1, X2, SmoothFunction, parse_expression


def test_cross_is_antisymmetric():
    assert cross((1.0, 0.0), (0.0, 1.0)) == 1.0
    assert cross((0.0, 1.0), (1.0, 0.0)) == -1.0
    assert cross((2.0, 3.0), (4.0, 6.0)) == 0.0


def test_vec2_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec2.of([np.nan, 0.0])


def test_tangent_of_unit_circle_is_counterclockwise():
    g = parse_expression("x1^2 + x2^2 - 1")
    np.testing.assert_allclose(tangent_vector(g, (1.0, 0.0)), [0.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(unit_tangent(g, (0.0, 1.0)), [-1.0, 0.0], atol=1e-15)


def test_tangent_raises_on_vanishing_gradient():
    with pytest.raises(DegenerateGradientError) as excinfo:
        tangent_vector(parse_expression("x1^2 + x2^2"), (0.0, 0.0))
    assert excinfo.value.norm == 0.0


def test_directional_derivative():
    f = parse_expression("x1 * x2")
    assert directional_derivative(f, (2.0, 3.0), (1.0, -1.0)) == pytest.approx(1.0)


def _random_quadratic(rng):
    a, b, c, d, e = rng.normal(size=5)
    return a * X1**2 + b * X1 * X2 + c * X2**2 + d * X1 + e * X2


def test_cross_sign_matches_slope_along_positive_tangent(rng):
    checked = 0
    for _ in range(1000):
        y = rng.uniform(-2.0, 2.0, size=2)
        q = SmoothFunction.from_expression(_random_quadratic(rng))
        g = SmoothFunction.from_expression(q.expression - q.value(y))
        f = SmoothFunction.from_expression(_random_quadratic(rng))
        value = cross(f.gradient(y), g.gradient(y))
        if abs(value) <= 1e-8:
            continue
        t = np.array([-g.gradient(y)[1], g.gradient(y)[0]])
        h = 1e-4
        slope = (f.value(y + h * t) - f.value(y - h * t)) / (2 * h)
        assert np.sign(value) == np.sign(-slope)
        checked += 1
    assert checked > 900


def test_cross_is_bilinear(rng):
    for _ in range(1000):
        u, v, w = rng.normal(size=(3, 2))
        a, b = rng.normal(size=2)
        assert cross(a * u + b * v, w) == pytest.approx(a * cross(u, w) + b * cross(v, w), abs=1e-12)
        assert cross(w, a * u + b * v) == pytest.approx(a * cross(w, u) + b * cross(w, v), abs=1e-12)
        assert cross(u, v) == pytest.approx(-cross(v, u), abs=1e-15)
