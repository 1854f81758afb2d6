"""
  Sufficient conditions for every KKT point of a concave two-dimensional
  program to be a global maximiser.

  For a constraint g_i the auxiliary boundary problem is

      min f(x)  subject to  g_i(x) = 0,   grad f + lambda grad g_i = 0.

  Its stationary points are located on the traced curve g_i = 0 inside the
  inflated box. A negative multiplier at a feasible stationary point is the
  pattern that allows a spurious KKT point.

  The weak check only looks at the global minimiser of each auxiliary problem
  of a non-convex constraint; the strong check looks at every stationary
  point and additionally accepts points that are local maxima of the full
  problem.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from invex2d.analysis.boundary import BoundaryPath, project_onto, trace_curve
from invex2d.analysis.geometry import Point2, unit_tangent
from invex2d.analysis.kkt import Classification, classify, is_kkt, is_local_max_sampled
from invex2d.analysis.problem import Problem2D, active_set, is_feasible
from invex2d.config import Settings, resolve
from invex2d.exceptions import (
    ConstantOnLineError,
    DegenerateVertexError,
    EvaluationDomainError,
    Invex2DError,
    LICQViolationError,
    NonAffineLineError,
)
from invex2d.expression import Expression, SmoothFunction, as_smooth, is_affine

logger = logging.getLogger(__name__)

FLAT_REPRESENTATIVES = 16
CURVE_PROBE = 1e-3


class Verdict(Enum):
    BOUNDARY_INVEX = "boundary-invex"
    WEAKLY_BOUNDARY_INVEX = "weakly-boundary-invex"
    WEAKLY_BOUNDARY_INVEX_ONLY = "weakly-boundary-invex-only"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"

    @property
    def passed(self) -> bool:
        return self in (Verdict.BOUNDARY_INVEX, Verdict.WEAKLY_BOUNDARY_INVEX)


@dataclass(frozen=True)
class AuxiliaryStationaryPoint:
    location: Point2
    multiplier: float
    kind: str  # "min", "max" or "flat"
    objective_value: float
    curvature: float  # second derivative of f along the curve
    component: int
    is_global_min: bool = False
    strict: bool = True


@dataclass(frozen=True)
class AuxiliaryResult:
    constraint: int
    name: str
    points: tuple[AuxiliaryStationaryPoint, ...]
    components: int
    truncation_markers: tuple[Point2, ...] = ()
    degenerate: bool = False  # f constant along some component
    unbounded: bool = False  # infimum approached at a box truncation
    note: str = ""

    @property
    def global_minimizers(self) -> tuple[AuxiliaryStationaryPoint, ...]:
        return tuple(q for q in self.points if q.is_global_min)


@dataclass(frozen=True)
class ClauseEvaluation:
    constraint: int
    point: Point2
    multiplier: float
    clauses: dict[str, bool]
    satisfied: bool
    classification: Classification | None = None


@dataclass(frozen=True)
class ConstraintEvidence:
    constraint: int
    name: str
    aux: AuxiliaryResult | None
    evaluations: tuple[ClauseEvaluation, ...]
    holds: bool | None  # None when the evidence is inconclusive
    note: str = ""


@dataclass(frozen=True)
class InvexityReport:
    verdict: Verdict
    mode: str  # "weak" or "boundary"
    nonconvex: tuple[int, ...]
    evidence: tuple[ConstraintEvidence, ...]
    witnesses: tuple[ClauseEvaluation, ...] = ()
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.verdict.passed


def aux_multiplier(f: SmoothFunction, g: SmoothFunction, x: Sequence[float]) -> float:
    """Least-squares lambda of grad f + lambda grad g = 0."""
    gf = f.gradient(x)
    gg = g.gradient(x)
    return float(-(gf @ gg) / (gg @ gg))


def _curve_point(g: SmoothFunction, path_points: np.ndarray, k: int, s: float, closed: bool, settings: Settings) -> np.ndarray:
    """Point on g = 0 near node k, s in [-1, 1] moving towards the previous/next node."""
    n = len(path_points)
    neighbour = (k + 1) % n if s >= 0 else (k - 1) % n
    if not closed:
        neighbour = min(max(neighbour, 0), n - 1)
    base = path_points[k]
    return project_onto(g, base + abs(s) * (path_points[neighbour] - base), settings)


def _polish(f: SmoothFunction, g: SmoothFunction, x: np.ndarray, settings: Settings) -> np.ndarray:
    """Newton on the stationarity system [grad f + lambda grad g; g] = 0."""
    lam = aux_multiplier(f, g, x)
    z = np.array([x[0], x[1], lam])
    start = z.copy()
    for _ in range(20):
        point = z[:2]
        gg = g.gradient(point)
        residual = np.concatenate([f.gradient(point) + z[2] * gg, [g.value(point)]])
        if np.linalg.norm(residual) <= 1e-13:
            break
        jacobian = np.zeros((3, 3))
        jacobian[:2, :2] = f.hessian(point) + z[2] * g.hessian(point)
        jacobian[:2, 2] = gg
        jacobian[2, :2] = gg
        try:
            z = z - np.linalg.solve(jacobian, residual)
        except np.linalg.LinAlgError:
            break
    if not np.all(np.isfinite(z)) or np.linalg.norm(z[:2] - start[:2]) > 1e-2:
        return x
    try:
        return project_onto(g, z[:2], settings)
    except Invex2DError:
        return x


def _curvature_along(f: SmoothFunction, g: SmoothFunction, x: np.ndarray, settings: Settings) -> float:
    t = unit_tangent(g, x, settings.tolerances.gradient)
    ahead = project_onto(g, x + CURVE_PROBE * t, settings)
    behind = project_onto(g, x - CURVE_PROBE * t, settings)
    return (f.value(ahead) - 2 * f.value(x) + f.value(behind)) / CURVE_PROBE**2


def _local_extrema(values: np.ndarray, closed: bool) -> tuple[list[int], list[int]]:
    n = len(values)
    minima, maxima = [], []
    for k in range(n):
        if not closed and (k == 0 or k == n - 1):
            continue
        before, after = values[(k - 1) % n], values[(k + 1) % n]
        if values[k] <= before and values[k] <= after and (values[k] < before or values[k] < after):
            minima.append(k)
        if values[k] >= before and values[k] >= after and (values[k] > before or values[k] > after):
            maxima.append(k)
    return minima, maxima


def _component_points(
    p: Problem2D, g: SmoothFunction, path: BoundaryPath, component: int, settings: Settings
) -> tuple[list[AuxiliaryStationaryPoint], bool]:
    f = p.objective
    pts = path.points
    values = f.values(pts[:, 0], pts[:, 1])
    spread = float(np.max(values) - np.min(values))
    if spread <= settings.invexity.tie_tolerance * max(1.0, float(np.max(np.abs(values)))):
        picks = np.unique(np.linspace(0, len(pts) - 1, FLAT_REPRESENTATIVES).astype(int))
        flat = [
            AuxiliaryStationaryPoint(
                Point2.of(pts[k]), aux_multiplier(f, g, pts[k]), "flat", float(values[k]), 0.0, component, strict=False
            )
            for k in picks
        ]
        return flat, True

    minima, maxima = _local_extrema(values, path.closed)
    found: list[AuxiliaryStationaryPoint] = []
    for kind, indices, sign in (("min", minima, 1.0), ("max", maxima, -1.0)):
        for k in indices:

            def along(s: float, k: int = k, sign: float = sign) -> float:
                return sign * f.value(_curve_point(g, pts, k, s, path.closed, settings))

            try:
                result = minimize_scalar(along, bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-10})
                x = _curve_point(g, pts, k, float(result.x), path.closed, settings)
                x = _polish(f, g, x, settings)
                curvature = _curvature_along(f, g, x, settings)
            except (Invex2DError, ValueError) as e:
                logger.debug(f"Refinement failed near node {k}: {e}")
                continue
            if any(np.linalg.norm(x - np.asarray(q.location)) <= settings.kkt.dedup_radius for q in found):
                continue
            strict = curvature > settings.invexity.strictness_tolerance if kind == "min" else True
            found.append(
                AuxiliaryStationaryPoint(
                    Point2.of(x), aux_multiplier(f, g, x), kind, f.value(x), curvature, component, strict=strict
                )
            )
    return found, False


def constraint_curves(p: Problem2D, i: int, settings: Settings | None = None) -> list[BoundaryPath]:
    """Components of g_i = 0 inside the inflated box."""
    settings = resolve(settings)
    box = p.box.inflated(settings.invexity.box_inflation)
    step = settings.invexity.aux_step_factor * box.diagonal
    return trace_curve(p.constraints[i].function, box, step, index=i, settings=settings)


def solve_aux_min(
    p: Problem2D,
    i: int,
    settings: Settings | None = None,
    curves: Sequence[BoundaryPath] | None = None,
) -> AuxiliaryResult:
    """
    Stationary points of min f subject to g_i = 0 inside the inflated box.

    Local minima and maxima of f along each traced component are bracketed on
    the nodes, refined by a bounded scalar search and polished by Newton on
    the stationarity system. Global minimisers are flagged; ties within the
    tie tolerance at points further apart than the tie separation, or a
    vanishing second derivative along the curve, make them non-strict.
    """
    settings = resolve(settings)
    constraint = p.constraints[i]
    g = constraint.function
    curves = constraint_curves(p, i, settings) if curves is None else curves
    if not curves:
        return AuxiliaryResult(i, constraint.name, (), 0, note="curve does not meet the box")

    points: list[AuxiliaryStationaryPoint] = []
    degenerate = False
    markers: list[Point2] = []
    endpoint_values: list[float] = []
    for component, path in enumerate(curves):
        found, flat = _component_points(p, g, path, component, settings)
        points.extend(found)
        degenerate = degenerate or flat
        if path.truncated:
            for node in (path.nodes[0], path.nodes[-1]):
                markers.append(node.point)
                endpoint_values.append(p.objective.value(node.point))

    unbounded = False
    candidates = [q for q in points if q.kind in ("min", "flat")]
    if candidates:
        best = min(q.objective_value for q in candidates)
        tolerance = settings.invexity.tie_tolerance * max(1.0, abs(best))
        if endpoint_values and min(endpoint_values) < best - tolerance:
            unbounded = True
        winners = [q for q in candidates if q.objective_value <= best + tolerance]
        tied = any(
            np.linalg.norm(np.subtract(a.location, b.location)) > settings.invexity.tie_separation
            for a in winners
            for b in winners
        )
        winner_ids = {id(q) for q in winners}
        points = [
            AuxiliaryStationaryPoint(
                q.location, q.multiplier, q.kind, q.objective_value, q.curvature, q.component,
                is_global_min=True, strict=q.strict and not tied,
            )
            if id(q) in winner_ids
            else q
            for q in points
        ]
    elif markers:
        unbounded = True

    note = "infimum approached at the box boundary" if unbounded else ""
    logger.debug(f"Auxiliary problem for {constraint.name}: {len(points)} stationary point(s), unbounded={unbounded}")
    return AuxiliaryResult(
        i, constraint.name, tuple(points), len(curves), tuple(markers), degenerate, unbounded, note
    )


def nonconvex_constraints(p: Problem2D, settings: Settings | None = None) -> tuple[int, ...]:
    """
    Indices of constraints whose Hessian has a negative eigenvalue below
    -1e-8 somewhere on the traced curve g_i = 0.

    Box edges, affine constraints and constraints hinted convex are skipped.
    """
    settings = resolve(settings)
    found = []
    for i, c in enumerate(p.constraints):
        if c.box_edge or c.convex_hint or is_affine(c.expression):
            continue
        try:
            curves = constraint_curves(p, i, settings)
        except Invex2DError as e:
            logger.warning(f"Could not trace {c.name}: {e}; treating it as non-convex")
            found.append(i)
            continue
        if not curves:
            continue
        pts = np.concatenate([path.points for path in curves])
        count = settings.invexity.nonconvexity_samples
        picks = pts[np.unique(np.linspace(0, len(pts) - 1, count).astype(int))]
        hessians = c.function.hessians(picks[:, 0], picks[:, 1])
        finite = np.all(np.isfinite(hessians), axis=(1, 2))
        eigenvalues = np.linalg.eigvalsh(hessians[finite])[:, 0]
        if eigenvalues.size and float(np.min(eigenvalues)) < -settings.invexity.strictness_tolerance:
            found.append(i)
    logger.info(f"Non-convex constraints of {p.name}: {[p.constraints[i].name for i in found]}")
    return tuple(found)


def _other_active(p: Problem2D, x: Sequence[float], i: int) -> bool:
    return any(j != i for j in active_set(p, x).indices)


def _weak_evidence(p: Problem2D, i: int, aux: AuxiliaryResult, settings: Settings) -> ConstraintEvidence:
    name = p.constraints[i].name
    if aux.components == 0:
        return ConstraintEvidence(i, name, aux, (), True, "curve does not meet the box")
    if aux.unbounded:
        return ConstraintEvidence(i, name, aux, (), True, aux.note)
    evaluations = []
    for q in aux.global_minimizers:
        clauses = {
            "infeasible": not is_feasible(p, q.location),
            "not_strict": not q.strict,
            "nonnegative_multiplier": q.multiplier >= -settings.tolerances.multiplier,
            "other_active": _other_active(p, q.location, i),
        }
        evaluations.append(ClauseEvaluation(i, q.location, q.multiplier, clauses, any(clauses.values())))
    if aux.degenerate:
        # a constant objective along the curve makes every point stationary
        note = f"objective is constant along a component of {name}"
        return ConstraintEvidence(i, name, aux, tuple(evaluations), None, note)
    holds = all(e.satisfied for e in evaluations)
    return ConstraintEvidence(i, name, aux, tuple(evaluations), holds)


def check_weak(p: Problem2D, settings: Settings | None = None) -> InvexityReport:
    """
    Weak boundary check: for every non-convex constraint the global minimiser
    of its auxiliary problem is infeasible, non-strict, has a non-negative
    multiplier, or has another constraint active.
    """
    settings = resolve(settings)
    nonconvex = nonconvex_constraints(p, settings)
    evidence = []
    for i in nonconvex:
        try:
            aux = solve_aux_min(p, i, settings)
        except Invex2DError as e:
            evidence.append(ConstraintEvidence(i, p.constraints[i].name, None, (), None, str(e)))
            continue
        evidence.append(_weak_evidence(p, i, aux, settings))
    # degenerate evidence reports its evaluations without counting them as witnesses
    witnesses = tuple(e for ev in evidence if ev.holds is False for e in ev.evaluations if not e.satisfied)
    if witnesses:
        verdict = Verdict.VIOLATED
    elif any(ev.holds is None for ev in evidence):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.WEAKLY_BOUNDARY_INVEX
    logger.info(f"Weak check on {p.name}: {verdict.value}")
    return InvexityReport(verdict, "weak", nonconvex, tuple(evidence), witnesses)


def _boundary_evaluation(
    p: Problem2D, i: int, q: AuxiliaryStationaryPoint, settings: Settings
) -> tuple[ClauseEvaluation, bool]:
    """Clause evaluation of one stationary point; second value flags an inconclusive classification."""
    infeasible = not is_feasible(p, q.location)
    nonnegative = q.multiplier >= -settings.tolerances.multiplier
    clauses = {"infeasible": infeasible, "nonnegative_multiplier": nonnegative, "local_max": False}
    classification = None
    inconclusive = False
    if not (infeasible or nonnegative):
        try:
            if is_kkt(p, q.location, settings).is_kkt:
                classification = classify(p, q.location, settings)
                inconclusive = classification == Classification.INCONCLUSIVE
                clauses["local_max"] = classification in (
                    Classification.LOCAL_MAX,
                    Classification.INTERIOR_UNCONSTRAINED_MAX,
                )
            else:
                clauses["local_max"] = is_local_max_sampled(p, q.location, settings)
        except (DegenerateVertexError, LICQViolationError) as e:
            logger.warning(f"Cannot classify {tuple(q.location)}: {e}")
            inconclusive = True
    satisfied = any(clauses.values())
    return ClauseEvaluation(i, q.location, q.multiplier, clauses, satisfied, classification), inconclusive


def check_boundary_invex(p: Problem2D, settings: Settings | None = None) -> InvexityReport:
    """
    Strong boundary check: every stationary point of every auxiliary problem
    of a non-convex constraint is infeasible, has a non-negative multiplier,
    or is a local maximum of the full problem.

    When the strong clauses fail but the weak ones hold the verdict is
    WEAKLY_BOUNDARY_INVEX_ONLY.
    """
    settings = resolve(settings)
    nonconvex = nonconvex_constraints(p, settings)
    evidence = []
    weak = []
    notes = []
    any_inconclusive = False
    for i in nonconvex:
        name = p.constraints[i].name
        try:
            aux = solve_aux_min(p, i, settings)
        except Invex2DError as e:
            evidence.append(ConstraintEvidence(i, name, None, (), None, str(e)))
            any_inconclusive = True
            continue
        evaluations = []
        inconclusive = False
        for q in aux.points:
            evaluation, unsure = _boundary_evaluation(p, i, q, settings)
            evaluations.append(evaluation)
            inconclusive = inconclusive or unsure
        holds = None if inconclusive else all(e.satisfied for e in evaluations)
        any_inconclusive = any_inconclusive or inconclusive
        evidence.append(ConstraintEvidence(i, name, aux, tuple(evaluations), holds, aux.note))
        weak.append(_weak_evidence(p, i, aux, settings))
        if aux.degenerate:
            notes.append(f"objective is constant along a component of {name}")

    witnesses = tuple(e for ev in evidence for e in ev.evaluations if not e.satisfied)
    if witnesses:
        weak_holds = all(ev.holds for ev in weak) and len(weak) == len(evidence)
        verdict = Verdict.WEAKLY_BOUNDARY_INVEX_ONLY if weak_holds else Verdict.VIOLATED
    elif any_inconclusive:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.BOUNDARY_INVEX
    logger.info(f"Boundary check on {p.name}: {verdict.value}")
    return InvexityReport(verdict, "boundary", nonconvex, tuple(evidence), witnesses, tuple(notes))


def check_ray_decrease(
    f: Expression | SmoothFunction,
    line: Expression | SmoothFunction,
    y: Sequence[float],
    samples: int = 20,
    spacing: float = 1e-2,
) -> bool:
    """
    Whether f strictly decreases along the ray from y in the direction of
    decrease of f on the line l = 0.

    y is first projected onto the line. Only sampled.

    :raises NonAffineLineError: l is not affine
    :raises ConstantOnLineError: f is constant along the line
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    objective = as_smooth(f)
    lf = as_smooth(line)
    if not is_affine(lf.expression):
        raise NonAffineLineError(f"line expression is not affine: {lf.expression}")
    normal = lf.gradient(y)
    origin = np.asarray(y, dtype=float)
    origin = origin - lf.value(origin) * normal / (normal @ normal)
    direction = np.array([-normal[1], normal[0]]) / np.linalg.norm(normal)

    slope = float(objective.gradient(origin) @ direction)
    if slope > 0:
        direction = -direction
    distances = spacing * np.arange(0, samples + 1)
    ray = origin + distances[:, None] * direction
    try:
        values = objective.values(ray[:, 0], ray[:, 1])
        gradients = objective.gradients(ray[:, 0], ray[:, 1])
    except EvaluationDomainError:
        return False
    if np.all(np.abs(gradients @ direction) <= 1e-10):
        raise ConstantOnLineError("objective is constant along the line")
    scale = max(1.0, abs(float(values[0])))
    return bool(np.all(np.diff(values) < -1e-12 * scale))

