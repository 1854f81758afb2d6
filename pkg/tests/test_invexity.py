import numpy as np
import pytest

from invex2d.analysis.invexity import (
    Verdict,
    aux_multiplier,
    check_boundary_invex,
    check_ray_decrease,
    check_weak,
    nonconvex_constraints,
    solve_aux_min,
)
from invex2d.analysis.kkt import is_kkt
from invex2d.analysis.problem import Box2, Problem2D, active_set, is_feasible
from invex2d.data_handling.corpus import named_instance
from invex2d.exceptions import ConstantOnLineError, NonAffineLineError
from invex2d.expression import X1, X2, SmoothFunction, parse_expression


def test_aux_multiplier_sign():
    f = SmoothFunction.from_expression(X1)
    g = SmoothFunction.from_expression(2.25 - (X1 + 1) ** 2 - X2**2)
    assert aux_multiplier(f, g, (-2.5, 0.0)) == pytest.approx(-1 / 3)
    assert aux_multiplier(f, g, (0.5, 0.0)) == pytest.approx(1 / 3)


def test_nonconvex_constraints(unit_disk, crescent):
    assert nonconvex_constraints(unit_disk) == ()
    assert nonconvex_constraints(crescent) == (crescent.index_of("hole"),)


def test_crescent_auxiliary_problem(crescent):
    aux = solve_aux_min(crescent, crescent.index_of("hole"))
    assert aux.components == 1
    assert not aux.unbounded
    (best,) = aux.global_minimizers
    np.testing.assert_allclose(best.location, [-2.5, 0.0], atol=1e-6)
    assert best.multiplier == pytest.approx(-1 / 3, abs=1e-6)
    assert best.strict
    maxima = [q for q in aux.points if q.kind == "max"]
    assert len(maxima) == 1
    np.testing.assert_allclose(maxima[0].location, [0.5, 0.0], atol=1e-6)
    assert maxima[0].multiplier == pytest.approx(1 / 3, abs=1e-6)


def test_crescent_is_boundary_invex(crescent):
    report = check_boundary_invex(crescent)
    assert report.verdict == Verdict.BOUNDARY_INVEX
    assert report.passed
    assert report.witnesses == ()
    (evidence,) = report.evidence
    assert evidence.holds
    assert all(e.clauses["infeasible"] or e.clauses["nonnegative_multiplier"] for e in evidence.evaluations)


def test_anti_disk_violates_weak_condition(anti_disk):
    report = check_weak(anti_disk)
    assert report.verdict == Verdict.VIOLATED
    assert not report.passed
    (witness,) = report.witnesses
    np.testing.assert_allclose(witness.point, [0.0, 1.0], atol=1e-6)
    assert witness.multiplier == pytest.approx(-0.5, abs=1e-6)
    assert not any(witness.clauses.values())


def test_anti_disk_violates_boundary_condition(anti_disk):
    assert check_boundary_invex(anti_disk).verdict == Verdict.VIOLATED


def test_convex_problems_pass_vacuously(unit_disk, unit_box):
    assert check_weak(unit_disk).verdict == Verdict.WEAKLY_BOUNDARY_INVEX
    assert check_boundary_invex(unit_disk).verdict == Verdict.BOUNDARY_INVEX
    assert check_boundary_invex(unit_box).nonconvex == ()


def test_half_crescent_is_boundary_invex():
    assert check_boundary_invex(named_instance("half-crescent")).verdict == Verdict.BOUNDARY_INVEX


def test_ray_decrease_example():
    assert check_ray_decrease(parse_expression("-(x1 - 3)^2"), parse_expression("x2"), (0.0, 0.0))


def test_ray_decrease_rejects_bad_lines():
    with pytest.raises(NonAffineLineError):
        check_ray_decrease(X1, X1 * X2, (0.0, 0.0))
    with pytest.raises(ConstantOnLineError):
        check_ray_decrease(X2, X2, (0.0, 0.0))


def test_ray_decrease_on_random_concave_quadratics(rng):
    for _ in range(100):
        m = rng.normal(size=(2, 2))
        a = m.T @ m + 0.1 * np.eye(2)
        c = rng.uniform(-2.0, 2.0, size=2)
        u1, u2 = X1 - c[0], X2 - c[1]
        f = -(a[0, 0] * u1**2 + 2 * a[0, 1] * u1 * u2 + a[1, 1] * u2**2)
        phi = rng.uniform(0.0, 2 * np.pi)
        line = np.cos(phi) * X1 + np.sin(phi) * X2 - rng.uniform(-1.0, 1.0)
        assert check_ray_decrease(f, line, rng.uniform(-2.0, 2.0, size=2))


def test_constant_objective_along_the_curve_is_inconclusive():
    p = Problem2D.build(-(X1**2) - X2**2, [("hole", 1 - X1**2 - X2**2)], Box2(-2.0, 2.0, -2.0, 2.0))
    report = check_weak(p)
    assert report.verdict == Verdict.INCONCLUSIVE
    assert not report.passed
    assert report.witnesses == ()
    (evidence,) = report.evidence
    assert evidence.holds is None
    assert "constant" in evidence.note


def test_weak_only_verdict_does_not_pass():
    p = Problem2D.build(-(X2**2), [("hole", 1 - X1**2 - X2**2)], Box2(-2.0, 2.0, -2.0, 2.0))
    assert check_weak(p).verdict == Verdict.WEAKLY_BOUNDARY_INVEX
    report = check_boundary_invex(p)
    assert report.verdict == Verdict.WEAKLY_BOUNDARY_INVEX_ONLY
    assert not report.passed
    assert any(np.allclose(w.point, (0.0, 1.0), atol=1e-6) for w in report.witnesses)


@pytest.mark.parametrize("name", ["anti-disk", "crescent"])
def test_aux_multiplier_is_minus_the_kkt_multiplier(name):
    p = named_instance(name)
    for i in nonconvex_constraints(p):
        for q in solve_aux_min(p, i).points:
            if not is_feasible(p, q.location) or active_set(p, q.location).indices != (i,):
                continue
            mu = is_kkt(p, q.location).multipliers[i]
            assert mu == pytest.approx(-q.multiplier, abs=1e-6)
            if abs(q.multiplier) > 1e-6:
                assert (q.multiplier < 0) == (mu > 0)
