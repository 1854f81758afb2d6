import math

import numpy as np
import pytest

from invex2d.analysis.boundary import corner_check, is_simple, trace_feasible_boundary
from invex2d.analysis.invexity import Verdict
from invex2d.analysis.oracle import GridSpec
from invex2d.analysis.problem import is_feasible
from invex2d.exceptions import ParameterWindowError
from invex2d.opf import (
    LINE_PARAM_TYPE,
    LineParams,
    aux_kkt_points,
    build_opf_problem,
    canonical_params,
    check_opf_invex,
    closed_form_threshold,
    line_flows,
    min_wr_bound,
    random_params,
    thermal_convexity,
)
from invex2d.opf.checks import THERMAL_CONSTANT
from invex2d.opf.model import loss_identity_residual


@pytest.mark.parametrize(
    "overrides",
    [
        {"theta_hi": math.pi / 4},
        {"v_lo": 0.5},
        {"g": 0.0},
        {"w": 1.2},
        {"s_u": -1.0},
        {"c2": -0.1},
        {"p2_lo": 11.0},
    ],
)
def test_parameter_windows(overrides):
    with pytest.raises(ParameterWindowError):
        canonical_params(**overrides)


def test_parameter_table_covers_line_params():
    assert set(LINE_PARAM_TYPE) == set(LineParams.__dataclass_fields__)


def test_constraint_count():
    assert len(build_opf_problem(canonical_params()).problem.user_constraints) == 14
    bare = LineParams(g=1.0, b=-5.0, w=1.0, s_u=1.0, c1=1.0, c2=0.1)
    names = [c.name for c in build_opf_problem(bare).problem.user_constraints]
    assert names == ["therm1", "therm2", "w_lo", "w_hi", "t_lo", "t_hi"]


def test_flows_vanish_at_equal_voltages(canonical):
    np.testing.assert_allclose(line_flows(canonical, 1.0, 0.0), [0.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_loss_identity(canonical, rng):
    points = rng.uniform(-1.2, 1.2, size=(50, 2))
    assert loss_identity_residual(canonical, points) < 1e-12


def test_closed_form_threshold(canonical):
    threshold = closed_form_threshold(canonical)
    assert threshold == pytest.approx(0.8227, abs=1e-3)
    assert threshold >= 0.82 * math.sqrt(canonical.w) - 1e-3


def test_min_wr_bound(canonical):
    report = min_wr_bound(canonical, GridSpec(401))
    assert report.passed
    assert report.feasible_count > 0
    assert report.min_feasible_wr >= 0.77 * canonical.w


@pytest.mark.slow
def test_min_wr_bound_full_grid(rng):
    for _ in range(3):
        report = min_wr_bound(random_params(rng))
        assert report.grid_resolution == 2001
        assert report.passed


def test_thermal_convexity(canonical):
    report = thermal_convexity(canonical)
    assert report.passed
    assert report.psi_residual < 1e-10
    assert report.max_second_derivative < 0
    assert report.max_analytic_second_derivative < 0
    assert THERMAL_CONSTANT == pytest.approx(0.69245, abs=1e-4)
    assert report.constant_below_bound


def test_thermal_convexity_needs_samples(canonical):
    with pytest.raises(ValueError):
        thermal_convexity(canonical, samples=5)


def test_wbound_candidate_is_infeasible(canonical):
    report = aux_kkt_points(canonical, "wbound")
    (candidate,) = report.candidates
    assert candidate.multiplier > 0
    assert candidate.wr < 0
    assert not candidate.feasible
    assert not is_feasible(build_opf_problem(canonical).problem, (candidate.wr, candidate.wi))
    assert report.passed


def test_aux_systems_over_random_draws(rng):
    for _ in range(5):
        params = random_params(rng)
        for which in ("wbound", "pbound", "qbound"):
            assert aux_kkt_points(params, which).passed


def test_aux_system_without_bound():
    bare = LineParams(g=1.0, b=-5.0, w=1.0, s_u=1.0, c1=1.0, c2=0.1)
    report = aux_kkt_points(bare, "pbound")
    assert report.candidates == ()
    assert "infinite" in report.note
    with pytest.raises(ValueError):
        aux_kkt_points(bare, "thermal")


@pytest.mark.slow
def test_canonical_instance_is_boundary_and_kt_invex(canonical):
    result = check_opf_invex(canonical, grid=GridSpec(801))
    assert result.report.verdict is Verdict.BOUNDARY_INVEX
    assert result.kt is not None and result.kt.is_kt_invex


def test_traced_opf_boundary_is_simple(canonical):
    problem = build_opf_problem(canonical).problem
    paths = trace_feasible_boundary(problem)
    assert paths
    for path in paths:
        assert path.closed
        assert is_simple(path)
        assert all(corner_check(problem, node) > 0 for node in path.corners)
