import numpy as np
import pytest

from invex2d.analysis.boundary import trace_feasible_boundary
from invex2d.analysis.geometry import cross
from invex2d.analysis.kkt import (
    Classification,
    classify,
    critical_cone,
    find_kkt_points,
    is_kkt,
    is_local_max_sampled,
    kkt_gap,
    multipliers_two_active,
)
from invex2d.analysis.problem import Box2, Problem2D
from invex2d.data_handling.corpus import NAMED_INSTANCES, named_instance
from invex2d.exceptions import DegenerateVertexError, LICQViolationError
from invex2d.expression import X1, X2, SmoothFunction


def _corner_problem():
    return Problem2D.build(X1 + X2, [("g1", X1 - 1), ("g2", X2 - 1)], Box2(0.0, 2.0, 0.0, 2.0))


def test_two_active_multipliers():
    p = _corner_problem()
    check = is_kkt(p, (1.0, 1.0))
    assert check.is_kkt
    assert check.active.names == ("g1", "g2")
    np.testing.assert_allclose(check.multipliers[:2], [1.0, 1.0])
    assert check.residual == pytest.approx(0.0, abs=1e-12)


def test_negative_multiplier_is_not_kkt():
    p = Problem2D.build(-X1 - X2, [("g1", X1 - 1), ("g2", X2 - 1)], Box2(0.0, 2.0, 0.0, 2.0))
    assert not is_kkt(p, (1.0, 1.0)).is_kkt


def test_redundant_constraint_is_ignored():
    p = Problem2D.build(X1, [("a", X1 - 1), ("b", 2 * X1 - 2)], Box2(0.0, 2.0, 0.0, 2.0))
    check = is_kkt(p, (1.0, 0.5))
    assert check.is_kkt
    assert check.nonredundant == (0,)


def test_parallel_gradients_violate_licq():
    p = Problem2D.build(X2, [("a", X1**2 + X2**2 - 1), ("b", 1 - (X1 - 2) ** 2 - X2**2)], Box2(-2.0, 3.0, -2.0, 2.0))
    with pytest.raises(LICQViolationError):
        multipliers_two_active(p, (1.0, 0.0), 0, 1)


def test_three_nonredundant_constraints_are_degenerate():
    p = Problem2D.build(X1, [("a", X1 - 1), ("b", X2 - 1), ("c", X1 + X2 - 2)], Box2(0.0, 2.0, 0.0, 2.0))
    with pytest.raises(DegenerateVertexError):
        is_kkt(p, (1.0, 1.0))


def test_cross_product_multipliers_match_linear_solve(rng):
    for _ in range(1000):
        x0 = rng.uniform(-1.0, 1.0, size=2)
        a, b, c = rng.normal(size=(3, 2))
        gi = a[0] * (X1 - x0[0]) + a[1] * (X2 - x0[1]) + 0.3 * (X1 - x0[0]) ** 2
        gj = b[0] * (X1 - x0[0]) + b[1] * (X2 - x0[1]) - 0.2 * (X2 - x0[1]) ** 2
        f = c[0] * X1 + c[1] * X2 - X1**2
        p = Problem2D.build(f, [("i", gi), ("j", gj)], Box2(-3.0, 3.0, -3.0, 3.0), check_concavity=False)
        grads = [SmoothFunction.from_expression(e).gradient(x0) for e in (gi, gj)]
        if abs(cross(grads[0], grads[1])) <= 1e-2:
            continue
        expected = np.linalg.solve(np.column_stack(grads), p.objective.gradient(x0))
        np.testing.assert_allclose(multipliers_two_active(p, x0, 0, 1), expected, rtol=1e-10, atol=1e-10)


def test_critical_cone_and_classification(unit_disk, anti_disk):
    cone = critical_cone(unit_disk, is_kkt(unit_disk, (1.0, 0.0)))
    assert len(cone.equalities) == 1
    np.testing.assert_allclose(np.abs(cone.basis[0]), [0.0, 1.0], atol=1e-12)
    assert classify(unit_disk, (1.0, 0.0)) == Classification.LOCAL_MAX
    assert classify(anti_disk, (0.0, 1.0)) == Classification.NOT_LOCAL_MAX


def test_corner_with_two_positive_multipliers_is_local_max():
    assert classify(_corner_problem(), (1.0, 1.0)) == Classification.LOCAL_MAX


def test_interior_maximum():
    p = Problem2D.build(-(X1 - 0.5) ** 2 - (X2 - 0.5) ** 2, [], Box2(0.0, 1.0, 0.0, 1.0))
    assert classify(p, (0.5, 0.5)) == Classification.INTERIOR_UNCONSTRAINED_MAX
    points = find_kkt_points(p, trace_feasible_boundary(p))
    assert len(points) == 1
    np.testing.assert_allclose(points[0].location, [0.5, 0.5], atol=1e-9)


def test_classify_rejects_non_kkt_point(unit_disk):
    with pytest.raises(ValueError):
        classify(unit_disk, (0.0, 0.0))


def test_sampling_sees_improvement(unit_disk):
    assert is_local_max_sampled(unit_disk, (1.0, 0.0))
    assert not is_local_max_sampled(unit_disk, (0.0, 1.0))


def test_unit_disk_kkt_points(unit_disk):
    points = find_kkt_points(unit_disk, trace_feasible_boundary(unit_disk))
    assert len(points) == 1
    np.testing.assert_allclose(points[0].location, [1.0, 0.0], atol=1e-8)
    assert points[0].multiplier(0) == pytest.approx(0.5, abs=1e-8)
    assert points[0].classification == Classification.LOCAL_MAX


def test_anti_disk_kkt_gap(anti_disk):
    points = find_kkt_points(anti_disk, trace_feasible_boundary(anti_disk))
    spurious = [q for q in points if np.allclose(q.location, (0.0, 1.0), atol=1e-6)]
    assert len(spurious) == 1
    assert spurious[0].multiplier(0) == pytest.approx(0.5, abs=1e-8)
    assert spurious[0].classification == Classification.NOT_LOCAL_MAX
    assert kkt_gap(points) == pytest.approx(3.0, abs=1e-6)


def test_kkt_gap_of_nothing_is_nan():
    assert np.isnan(kkt_gap([]))


def test_licq_tolerance_scales_with_the_gradients():
    f = X1 + X2
    gi = 1e-3 * (X1 - 1)
    x = (1.0, 0.0)
    box = Box2(0.0, 2.0, -1.0, 1.0)
    nearly = Problem2D.build(f, [("i", gi), ("j", 1e-3 * ((X1 - 1) + 1e-5 * X2))], box, check_concavity=False)
    mu = multipliers_two_active(nearly, x, 0, 1)
    grads = np.column_stack([nearly.constraints[0].gradient(x), nearly.constraints[1].gradient(x)])
    np.testing.assert_allclose(mu, np.linalg.solve(grads, nearly.objective.gradient(x)), rtol=1e-8)

    parallel = Problem2D.build(f, [("i", gi), ("j", 1e-3 * ((X1 - 1) + 1e-10 * X2))], box, check_concavity=False)
    with pytest.raises(LICQViolationError):
        multipliers_two_active(parallel, x, 0, 1)


@pytest.mark.parametrize("name", sorted(NAMED_INSTANCES))
def test_found_points_satisfy_the_kkt_conditions(name, settings):
    p = named_instance(name)
    tolerances = settings.tolerances
    for q in find_kkt_points(p, trace_feasible_boundary(p)):
        assert is_kkt(p, q.location).is_kkt
        assert q.residual <= tolerances.stationarity
        assert all(mu >= -tolerances.multiplier for mu in q.multipliers)
        assert all(mu == 0.0 for k, mu in enumerate(q.multipliers) if k not in q.active.indices)
