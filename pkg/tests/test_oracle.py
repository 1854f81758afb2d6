import numpy as np
import pytest

from invex2d.analysis.boundary import trace_feasible_boundary
from invex2d.analysis.kkt import find_kkt_points
from invex2d.analysis.oracle import GridSpec, boundary_to_global, grid_global_max, verify_kt_invex
from invex2d.analysis.problem import load_problem
from invex2d.exceptions import EmptyFeasibleError


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(1)


def test_unit_disk_grid_maximum(unit_disk):
    result = grid_global_max(unit_disk, GridSpec(201), refine=False)
    assert result.best_value == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(result.best_point, [1.0, 0.0], atol=1e-9)
    assert result.total_count == 201 * 201
    assert 0 < result.feasible_count < result.total_count


def test_finer_nested_grid_never_does_worse(crescent):
    coarse = grid_global_max(crescent, GridSpec(11), refine=False)
    fine = grid_global_max(crescent, GridSpec(21), refine=False)
    assert fine.best_value >= coarse.best_value


def test_refinement_reaches_the_optimum(crescent):
    result = grid_global_max(crescent, GridSpec(101), refine=True)
    assert result.refined
    assert result.best_value == pytest.approx(2.0, abs=1e-3)


def test_empty_feasible_set():
    p = load_problem("var x1 in [-1, 1]\nvar x2 in [-1, 1]\nmaximize x1\nconstraint void: x1^2 + x2^2 + 1 <= 0\n")
    with pytest.raises(EmptyFeasibleError) as excinfo:
        grid_global_max(p, GridSpec(11))
    assert excinfo.value.total_count == 121


def test_anti_disk_is_not_kt_invex(anti_disk):
    points = find_kkt_points(anti_disk, trace_feasible_boundary(anti_disk))
    verdict = verify_kt_invex(anti_disk, points, GridSpec(201))
    assert not verdict.is_kt_invex
    assert verdict.global_max.best_value == pytest.approx(2.0, abs=1e-9)
    assert max(verdict.gaps) == pytest.approx(3.0, abs=1e-3)
    assert any(np.allclose(q, (0.0, 1.0), atol=1e-6) for q in verdict.violating)


def test_crescent_is_kt_invex(crescent):
    points = find_kkt_points(crescent, trace_feasible_boundary(crescent))
    verdict = verify_kt_invex(crescent, points, GridSpec(201))
    assert verdict.is_kt_invex
    assert len(points) == 1


def test_boundary_to_global(unit_disk, anti_disk):
    paths = trace_feasible_boundary(unit_disk)
    result = boundary_to_global(unit_disk, (1.0, 0.0), paths, GridSpec(201))
    assert result.precondition_met and result.premise_holds and result.conclusion_holds
    assert result
    vacuous = boundary_to_global(anti_disk, (0.0, 1.0), trace_feasible_boundary(anti_disk), GridSpec(51))
    assert not vacuous.precondition_met
    assert vacuous


def test_kt_verdict_ignores_point_order(anti_disk, rng):
    points = find_kkt_points(anti_disk, trace_feasible_boundary(anti_disk))
    order = rng.permutation(len(points))
    verdict = verify_kt_invex(anti_disk, points, GridSpec(101))
    shuffled = verify_kt_invex(anti_disk, [points[k] for k in order], GridSpec(101))
    assert shuffled.is_kt_invex == verdict.is_kt_invex
    assert shuffled.global_max.best_value == verdict.global_max.best_value
    np.testing.assert_array_equal(shuffled.gaps, np.asarray(verdict.gaps)[order])
    assert sorted(shuffled.violating) == sorted(verdict.violating)
