"""
  Kuhn-Tucker points of a two-dimensional program.

  Convention for maximisation: grad f(x) = sum_i mu_i grad g_i(x) with
  mu_i >= 0 and mu_i = 0 for inactive constraints. With two active
  constraints the multipliers follow from 2D cross products:

      mu_i = cross(grad f, grad g_j) / cross(grad g_i, grad g_j)
      mu_j = cross(grad g_i, grad f) / cross(grad g_i, grad g_j)
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from invex2d.analysis.boundary import BoundaryPath, project_onto
from invex2d.analysis.geometry import Point2, cross, unit_tangent
from invex2d.analysis.problem import ActiveSet, Problem2D, active_set, is_feasible
from invex2d.config import Settings, resolve
from invex2d.exceptions import (
    DegenerateGradientError,
    DegenerateVertexError,
    EvaluationDomainError,
    Invex2DError,
    LICQViolationError,
)

logger = logging.getLogger(__name__)

CONVEXITY_TOLERANCE = 1e-8
PARALLEL_TOLERANCE = 1e-10


class Classification(Enum):
    LOCAL_MAX = "local-max"
    NOT_LOCAL_MAX = "not-local-max"
    INTERIOR_UNCONSTRAINED_MAX = "interior-unconstrained-max"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class KKTCheck:
    """Outcome of testing the KKT conditions at one point."""

    point: Point2
    is_kkt: bool
    active: ActiveSet
    nonredundant: tuple[int, ...]
    multipliers: tuple[float, ...]  # one per constraint, zero when inactive or redundant
    residual: float


@dataclass(frozen=True)
class KKTPoint:
    location: Point2
    active: ActiveSet
    multipliers: tuple[float, ...]
    objective_value: float
    residual: float
    classification: Classification | None = None

    def multiplier(self, index: int) -> float:
        return self.multipliers[index]


@dataclass(frozen=True)
class CriticalConeSpec:
    """Directions w with grad g_i . w = 0 for mu_i > 0 and grad g_i . w <= 0 for active mu_i = 0."""

    equalities: tuple[int, ...]
    inequalities: tuple[int, ...]
    basis: tuple[Point2, ...]  # empty when the cone is {0}


def _nonredundant(p: Problem2D, x: Sequence[float], active: ActiveSet, gradient_tolerance: float) -> tuple[int, ...]:
    """Drop active constraints whose gradient points the same way as one already kept."""
    kept: list[tuple[int, np.ndarray]] = []
    for i in active:
        gradient = p.constraints[i].gradient(x)
        norm = float(np.linalg.norm(gradient))
        if norm < gradient_tolerance:
            raise DegenerateGradientError(x, norm)
        unit = gradient / norm
        if any(abs(cross(unit, other)) <= PARALLEL_TOLERANCE and unit @ other > 0 for _, other in kept):
            continue
        kept.append((i, unit))
    return tuple(i for i, _ in kept)


def multipliers_two_active(
    p: Problem2D, x: Sequence[float], i: int, j: int, settings: Settings | None = None
) -> tuple[float, float]:
    """
    Multipliers of the active pair (i, j) at x from cross-product ratios,
    checked against a direct solve of the 2x2 stationarity system.

    :raises LICQViolationError: |grad g_i x grad g_j| below the gradient tolerance
        times both gradient norms, or the two solutions disagree
    """
    tolerance = resolve(settings).tolerances.gradient
    gf = p.objective.gradient(x)
    gi = p.constraints[i].gradient(x)
    gj = p.constraints[j].gradient(x)
    denominator = cross(gi, gj)
    scale = float(np.linalg.norm(gi) * np.linalg.norm(gj))
    if abs(denominator) < tolerance * scale or scale == 0.0:
        raise LICQViolationError(x, i, j, denominator)
    mu = np.array([cross(gf, gj) / denominator, cross(gi, gf) / denominator])
    solved = np.linalg.solve(np.column_stack([gi, gj]), gf)
    # agreement to 1e-10, relaxed by the conditioning of the pair
    condition = scale / abs(denominator)
    if not np.allclose(solved, mu, rtol=1e-10 * condition, atol=1e-10 * condition):
        logger.warning(f"Cross-product multipliers {tuple(mu)} differ from linear solve {tuple(solved)}")
        raise LICQViolationError(x, i, j, denominator)
    return float(mu[0]), float(mu[1])


def is_kkt(p: Problem2D, x: Sequence[float], settings: Settings | None = None) -> KKTCheck:
    """
    Test the KKT conditions at x.

    Redundant active constraints (gradient parallel to another active one)
    are ignored.

    :raises DegenerateVertexError: more than two non-redundant active constraints
    :raises LICQViolationError: two active gradients are antiparallel
    """
    settings = resolve(settings)
    tolerances = settings.tolerances
    point = Point2.of(x)
    active = active_set(p, x)
    nonredundant = _nonredundant(p, x, active, tolerances.gradient)
    multipliers = [0.0] * len(p.constraints)
    gf = p.objective.gradient(x)
    feasible = is_feasible(p, x, p.active_tolerance)

    if len(nonredundant) == 0:
        residual = float(np.linalg.norm(gf))
        ok = residual <= tolerances.stationarity
    elif len(nonredundant) == 1:
        i = nonredundant[0]
        gi = p.constraints[i].gradient(x)
        mu = float(gf @ gi / (gi @ gi))
        residual = float(np.linalg.norm(gf - mu * gi))
        multipliers[i] = mu
        ok = residual <= tolerances.stationarity and mu >= -tolerances.multiplier
    elif len(nonredundant) == 2:
        i, j = nonredundant
        mu_i, mu_j = multipliers_two_active(p, x, i, j, settings)
        multipliers[i], multipliers[j] = mu_i, mu_j
        gi = p.constraints[i].gradient(x)
        gj = p.constraints[j].gradient(x)
        residual = float(np.linalg.norm(gf - mu_i * gi - mu_j * gj))
        ok = min(mu_i, mu_j) >= -tolerances.multiplier
    else:
        raise DegenerateVertexError(x, nonredundant)
    return KKTCheck(point, ok and feasible, active, nonredundant, tuple(multipliers), residual)


def critical_cone(p: Problem2D, check: KKTCheck, settings: Settings | None = None) -> CriticalConeSpec:
    tolerance = resolve(settings).tolerances.multiplier
    equalities = tuple(i for i in check.nonredundant if check.multipliers[i] > tolerance)
    inequalities = tuple(i for i in check.nonredundant if check.multipliers[i] <= tolerance)
    if len(equalities) >= 2:
        basis: tuple[Point2, ...] = ()
    elif len(equalities) == 1:
        basis = (Point2.of(unit_tangent(p.constraints[equalities[0]].function, check.point)),)
    else:
        basis = (Point2(1.0, 0.0), Point2(0.0, 1.0))
    return CriticalConeSpec(equalities, inequalities, basis)


def _curve_samples(p: Problem2D, x: np.ndarray, active: Sequence[int], radius: float, settings: Settings) -> list[np.ndarray]:
    """Points at arc distance about `radius` along each active constraint curve, both directions."""
    samples = []
    for i in active:
        g = p.constraints[i].function
        try:
            t = unit_tangent(g, x, settings.tolerances.gradient)
            for sign in (1.0, -1.0):
                samples.append(project_onto(g, x + sign * radius * t, settings))
        except Invex2DError:
            continue
    return samples


def is_local_max_sampled(p: Problem2D, x: Sequence[float], settings: Settings | None = None) -> bool:
    """
    Neighbourhood sampling test: no feasible point at the sampled radii
    improves f by more than the improvement tolerance.

    Samples cover straight directions and arcs along each active constraint.
    """
    settings = resolve(settings)
    kkt = settings.kkt
    x = np.asarray(x, dtype=float)
    reference = p.objective.value(x)
    angles = 2 * np.pi * np.arange(kkt.sample_directions) / kkt.sample_directions
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    active = active_set(p, x).indices
    for radius in kkt.sample_radii:
        candidates = list(x + radius * directions) + _curve_samples(p, x, active, radius, settings)
        for y in candidates:
            try:
                if is_feasible(p, y) and p.objective.value(y) > reference + kkt.improvement_tolerance:
                    logger.debug(f"{tuple(x)} improved at {tuple(y)}")
                    return False
            except EvaluationDomainError:
                continue
    return True


def _is_locally_convex(p: Problem2D, i: int, x: Sequence[float]) -> bool:
    constraint = p.constraints[i]
    if constraint.convex_hint:
        return True
    return bool(np.linalg.eigvalsh(constraint.function.hessian(x))[0] >= -CONVEXITY_TOLERANCE)


def classify(p: Problem2D, x: Sequence[float], settings: Settings | None = None) -> Classification:
    """
    Second-order classification of a KKT point, cross-checked against
    neighbourhood sampling.

    Two positive multipliers make the critical cone {0}, so the point is a
    strict local maximum. With one positive multiplier and a convex active
    constraint the feasible set is locally convex and the point is a local
    maximum; otherwise the sign of the Lagrangian curvature along the
    tangent decides. Disagreement with sampling yields INCONCLUSIVE.

    :raises ValueError: x is not a KKT point
    """
    settings = resolve(settings)
    check = is_kkt(p, x, settings)
    if not check.is_kkt:
        raise ValueError(f"{tuple(x)} is not a KKT point")
    cone = critical_cone(p, check, settings)
    sampled = is_local_max_sampled(p, x, settings)

    if len(cone.equalities) == 0:
        second_order = Classification.INTERIOR_UNCONSTRAINED_MAX
        agrees = sampled
    elif len(cone.equalities) >= 2:
        second_order = Classification.LOCAL_MAX
        agrees = sampled
    else:
        i = cone.equalities[0]
        if _is_locally_convex(p, i, x):
            second_order = Classification.LOCAL_MAX
        else:
            w = np.asarray(cone.basis[0])
            lagrangian = p.objective.hessian(x) - sum(
                check.multipliers[k] * p.constraints[k].function.hessian(x) for k in check.nonredundant
            )
            curvature = float(w @ lagrangian @ w)
            tolerance = settings.kkt.curvature_tolerance
            if curvature <= -tolerance:
                second_order = Classification.LOCAL_MAX
            elif curvature >= tolerance:
                second_order = Classification.NOT_LOCAL_MAX
            else:
                logger.debug(f"Flat curvature {curvature:.3e} at {tuple(x)}; deferring to sampling")
                return Classification.LOCAL_MAX if sampled else Classification.NOT_LOCAL_MAX
        agrees = sampled == (second_order == Classification.LOCAL_MAX)

    if not agrees:
        logger.warning(f"Second-order test ({second_order.value}) disagrees with sampling at {tuple(x)}")
        return Classification.INCONCLUSIVE
    return second_order


def _interior_candidates(p: Problem2D, settings: Settings) -> list[np.ndarray]:
    """Newton iterations on grad f = 0 from the box center and seeded restarts."""
    rng = np.random.default_rng(settings.run.seed)
    box = p.box
    starts = [box.center] + [
        np.array([rng.uniform(box.lo1, box.hi1), rng.uniform(box.lo2, box.hi2)])
        for _ in range(settings.kkt.random_restarts)
    ]
    found = []
    for x in starts:
        try:
            for _ in range(settings.tracing.newton_max_iterations):
                gradient = p.objective.gradient(x)
                if np.linalg.norm(gradient) <= 1e-12:
                    break
                x = x - np.linalg.solve(p.objective.hessian(x), gradient)
                if not np.all(np.isfinite(x)):
                    break
        except (np.linalg.LinAlgError, EvaluationDomainError):
            continue
        if np.all(np.isfinite(x)) and box.contains(x, p.feasibility_tolerance):
            found.append(x)
    return found


def _stationarity_gap(p: Problem2D, x: np.ndarray, i: int) -> float:
    return cross(p.objective.gradient(x), p.constraints[i].gradient(x))


def _boundary_candidates(p: Problem2D, path: BoundaryPath, settings: Settings) -> list[np.ndarray]:
    """Sign changes of cross(grad f, grad g_active) along single-active segments, corners, and flat runs."""
    candidates: list[np.ndarray] = []
    points = path.points
    count = len(points)
    last = count if path.closed else count - 1
    flat: list[int] = []

    for k in range(last):
        node = path.nodes[k]
        a = points[k]
        b = points[(k + 1) % count]
        i = node.active
        g = p.constraints[i].function
        da = _stationarity_gap(p, a, i)
        db = _stationarity_gap(p, b, i)
        scale = float(np.linalg.norm(p.objective.gradient(a)) * np.linalg.norm(g.gradient(a)))
        if abs(da) <= 1e-9 * max(scale, 1e-12):
            flat.append(k)
            continue
        if da * db < 0:

            def gap(s: float) -> float:
                return _stationarity_gap(p, project_onto(g, a + s * (b - a), settings), i)

            try:
                s = brentq(gap, 0.0, 1.0, xtol=settings.kkt.refine_tolerance)
                candidates.append(project_onto(g, a + s * (b - a), settings))
            except (ValueError, Invex2DError) as e:
                logger.debug(f"Bracket refinement failed on segment {k}: {e}")

    # runs of flat nodes contribute their ends and middle
    runs: list[list[int]] = []
    for k in flat:
        if runs and k == runs[-1][-1] + 1:
            runs[-1].append(k)
        else:
            runs.append([k])
    for run in runs:
        for k in {run[0], run[len(run) // 2], run[-1]}:
            candidates.append(points[k])

    candidates.extend(np.asarray(node.point) for node in path.corners)
    return candidates


def find_kkt_points(
    p: Problem2D, paths: Sequence[BoundaryPath], settings: Settings | None = None
) -> list[KKTPoint]:
    """
    Enumerate KKT points: interior stationary points, single-active boundary
    points bracketed along the traced paths, and corners.

    Candidates closer than the dedup radius are merged, keeping the one with
    the smallest stationarity residual. Each point is classified.
    """
    settings = resolve(settings)
    candidates = _interior_candidates(p, settings)
    for path in paths:
        candidates.extend(_boundary_candidates(p, path, settings))

    accepted: list[tuple[np.ndarray, KKTCheck]] = []
    for x in candidates:
        try:
            check = is_kkt(p, x, settings)
        except (DegenerateVertexError, LICQViolationError, DegenerateGradientError) as e:
            logger.warning(f"Skipping candidate {tuple(x)}: {e}")
            continue
        if not check.is_kkt:
            continue
        duplicate = next(
            (k for k, (y, _) in enumerate(accepted) if np.linalg.norm(y - x) <= settings.kkt.dedup_radius), None
        )
        if duplicate is None:
            accepted.append((np.asarray(x, dtype=float), check))
        elif check.residual < accepted[duplicate][1].residual:
            accepted[duplicate] = (np.asarray(x, dtype=float), check)

    points = []
    for x, check in accepted:
        points.append(
            KKTPoint(
                location=check.point,
                active=check.active,
                multipliers=check.multipliers,
                objective_value=p.objective.value(x),
                residual=check.residual,
                classification=classify(p, x, settings),
            )
        )
    logger.info(f"Found {len(points)} KKT point(s) for {p.name}")
    return points


def kkt_gap(points: Sequence[KKTPoint]) -> float:
    """Spread between the best and worst objective values among KKT points."""
    if not points:
        return math.nan
    values = [q.objective_value for q in points]
    return max(values) - min(values)
