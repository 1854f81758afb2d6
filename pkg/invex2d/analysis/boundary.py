"""
  Boundary continuation for the feasible set of a two-dimensional program.

  The boundary is traced as a closed polyline by a predictor-corrector
  scheme: the predictor advances along the normalised positive tangent
  (-g_x2, g_x1) of the active constraint, the corrector projects back onto
  the active curve along its gradient. When another constraint becomes
  violated within a step, the corner is located by root bracketing on the
  segment and the active constraint switches. The arc parameter t is the
  accumulated chord length.

  The same machinery traces the zero curve of a single constraint inside a
  box (closed, or truncated where it leaves the box), which the auxiliary
  boundary problems use.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from invex2d.analysis.geometry import Point2, cross, unit_tangent
from invex2d.analysis.problem import Box2, Problem2D, active_set, is_feasible
from invex2d.config import Settings, resolve
from invex2d.exceptions import (
    ConstantOnLineError,
    CornerOrientationError,
    DegenerateGradientError,
    EvaluationDomainError,
    Invex2DError,
    MaxStepsExceededError,
    NonAffineLineError,
    NotOnBoundaryError,
    StepHalvingExhaustedError,
    TracingError,
)
from invex2d.expression import Expression, SmoothFunction, as_smooth, is_affine

logger = logging.getLogger(__name__)

LINE_ZERO_TOLERANCE = 1e-12
SEGMENT_SLACK = 1e-12


@dataclass(frozen=True)
class BoundaryNode:
    t: float
    point: Point2
    active: int
    is_corner: bool = False
    corner: tuple[int, int] | None = None  # (incoming, outgoing) constraint indices


@dataclass(frozen=True)
class BoundaryPath:
    nodes: tuple[BoundaryNode, ...]
    closed: bool
    total_length: float
    step: float
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def points(self) -> np.ndarray:
        return np.array([n.point for n in self.nodes], dtype=float).reshape(-1, 2)

    @property
    def corners(self) -> tuple[BoundaryNode, ...]:
        return tuple(n for n in self.nodes if n.is_corner)

    @property
    def closure_gap(self) -> float:
        return float(np.linalg.norm(self.points[0] - self.points[-1]))


@dataclass(frozen=True)
class Crossing:
    k: int
    t: float
    point: Point2
    parity: str  # "even": l > 0 into l < 0, "odd": l < 0 into l > 0
    cross_sign: int


@dataclass(frozen=True)
class CrossingSequence:
    crossings: tuple[Crossing, ...]
    arc_max: tuple[float, ...]  # max of the objective between consecutive crossings, closing arc last
    skipped_tangencies: int = 0

    def __len__(self) -> int:
        return len(self.crossings)


def default_step(box: Box2, settings: Settings | None = None) -> float:
    return resolve(settings).tracing.step_factor * box.diagonal


def project_onto(g: SmoothFunction, y: Sequence[float], settings: Settings | None = None) -> np.ndarray:
    """
    Newton projection of y onto g = 0 along the gradient direction.

    :raises DegenerateGradientError: gradient vanishes during the correction
    :raises TracingError: residual not reached within the iteration budget
    """
    settings = resolve(settings)
    residual = settings.tracing.corrector_residual
    x = np.array(y, dtype=float)
    for _ in range(settings.tracing.newton_max_iterations):
        value = g.value(x)
        if abs(value) <= residual:
            return x
        gradient = g.gradient(x)
        norm2 = float(gradient @ gradient)
        if math.sqrt(norm2) < settings.tolerances.gradient:
            raise DegenerateGradientError(x, math.sqrt(norm2))
        x = x - (value / norm2) * gradient
    if abs(g.value(x)) <= residual:
        return x
    raise TracingError(f"corrector did not reach residual {residual} near {tuple(x)}")


def corner_value(p: Problem2D, x: Sequence[float], incoming: int, outgoing: int) -> float:
    return cross(p.constraints[incoming].gradient(x), p.constraints[outgoing].gradient(x))


def corner_check(p: Problem2D, corner: BoundaryNode) -> float:
    """
    Cross product of the incoming and outgoing constraint gradients at a corner.

    Positive for every legitimate corner of a positively oriented traversal;
    a non-positive value signals an orientation or LICQ failure.
    """
    if not corner.is_corner or corner.corner is None:
        raise ValueError("corner_check requires a corner node")
    incoming, outgoing = corner.corner
    return corner_value(p, corner.point, incoming, outgoing)


def _other_violations(p: Problem2D, y: np.ndarray, exclude: Sequence[int], tolerance: float) -> list[int]:
    violated = []
    for j, c in enumerate(p.constraints):
        if j in exclude:
            continue
        try:
            if c.value(y) > tolerance:
                violated.append(j)
        except EvaluationDomainError:
            violated.append(j)
    return violated


def _initial_active(p: Problem2D, x0: np.ndarray, active: Sequence[int], step: float, settings: Settings) -> int:
    """Pick the active constraint whose positive direction stays on the boundary."""
    for i in active:
        g = p.constraints[i].function
        try:
            t = unit_tangent(g, x0, settings.tolerances.gradient)
            y = project_onto(g, x0 + 0.5 * step * t, settings)
        except Invex2DError:
            continue
        if not _other_violations(p, y, (i,), settings.tolerances.feasibility):
            return i
    raise NotOnBoundaryError("no active constraint continues the boundary from the start point", x0)


def _locate_corner(
    p: Problem2D, x: np.ndarray, t: np.ndarray, h: float, i: int, j: int, settings: Settings
) -> np.ndarray:
    gi = p.constraints[i].function
    gj = p.constraints[j].function

    def along(s: float) -> float:
        return gj.value(project_onto(gi, x + s * h * t, settings))

    if gj.value(x) >= 0.0:
        s_star = 0.0
    else:
        s_star = brentq(along, 0.0, 1.0, xtol=1e-14, maxiter=200)
    c = project_onto(gi, x + s_star * h * t, settings)
    for _ in range(20):
        residual = np.array([gi.value(c), gj.value(c)])
        if np.max(np.abs(residual)) <= 1e-13:
            break
        jacobian = np.array([gi.gradient(c), gj.gradient(c)])
        try:
            c = c - np.linalg.solve(jacobian, residual)
        except np.linalg.LinAlgError:
            break
    worst = max(abs(gi.value(c)), abs(gj.value(c)))
    if worst > settings.tracing.corner_residual:
        raise TracingError(f"corner between constraints {i} and {j} not resolved (residual {worst:.3e})")
    logger.debug(f"Corner {p.constraints[i].name} -> {p.constraints[j].name} at {tuple(c)}")
    return c


def _advance(p: Problem2D, x: np.ndarray, i: int, step: float, settings: Settings) -> tuple[np.ndarray, int | None]:
    """One predictor-corrector step; returns the new point and the constraint switched to, if any."""
    g = p.constraints[i].function
    t = unit_tangent(g, x, settings.tolerances.gradient)
    h = step
    for _ in range(settings.tracing.max_halvings + 1):
        y = project_onto(g, x + h * t, settings)
        if (y - x) @ t <= 0:
            h /= 2
            continue
        violated = _other_violations(p, y, (i,), settings.tolerances.feasibility)
        if not violated:
            return y, None
        if len(violated) == 1:
            j = violated[0]
            corner = _locate_corner(p, x, t, h, i, j, settings)
            if not _other_violations(p, corner, (i, j), settings.tolerances.feasibility):
                return corner, j
        h /= 2
    raise StepHalvingExhaustedError(x)


def trace_boundary(
    p: Problem2D,
    start: Sequence[float],
    step: float | None = None,
    settings: Settings | None = None,
) -> BoundaryPath:
    """
    Trace the boundary component through `start` as a closed polyline.

    :param p: problem
    :param start: feasible point with at least one active constraint
    :param step: predictor step, default 1e-2 of the box diagonal
    :returns: closed, positively oriented path
    :raises NotOnBoundaryError: start infeasible or interior
    :raises DegenerateGradientError: LICQ fails at a corrector point
    :raises CornerOrientationError: corner gradient cross product not positive
    :raises MaxStepsExceededError: the path did not close
    """
    settings = resolve(settings)
    step = default_step(p.box, settings) if step is None else step
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")

    x0 = np.asarray(start, dtype=float)
    if not is_feasible(p, x0, p.active_tolerance):
        raise NotOnBoundaryError("start point is infeasible", x0)
    active = active_set(p, x0)
    if len(active) == 0:
        raise NotOnBoundaryError("no constraint is active at the start point", x0)
    i = _initial_active(p, x0, active.indices, step, settings)
    x0 = project_onto(p.constraints[i].function, x0, settings)
    start_active = i

    nodes = [BoundaryNode(0.0, Point2.of(x0), i)]
    length = 0.0
    left_start = False
    max_steps = math.ceil(settings.tracing.max_steps_factor * p.box.perimeter / step)
    x = x0
    for _ in range(max_steps):
        y, switch_to = _advance(p, x, i, step, settings)
        if switch_to is not None:
            value = corner_value(p, y, i, switch_to)
            if value <= 0:
                raise CornerOrientationError(y, value)
            node = BoundaryNode(length + float(np.linalg.norm(y - x)), Point2.of(y), switch_to, True, (i, switch_to))
            i = switch_to
        else:
            node = BoundaryNode(length + float(np.linalg.norm(y - x)), Point2.of(y), i)

        distance = float(np.linalg.norm(y - x0))
        if not left_start and distance > 2 * step:
            left_start = True
        if left_start and i == start_active and distance <= step:
            if (x0 - y) @ (y - x) > 0:
                nodes.append(node)
                length = node.t
                last = y
            else:
                # y already passed the start, close from x
                last = x
            total = length + float(np.linalg.norm(x0 - last))
            logger.info(f"Boundary closed after {len(nodes)} nodes, length {total:.6g}")
            return BoundaryPath(tuple(nodes), True, total, step)
        nodes.append(node)
        length = node.t
        x = y
    raise MaxStepsExceededError(max_steps)


def _walk_curve(
    g: SmoothFunction,
    x0: np.ndarray,
    direction: float,
    box: Box2,
    step: float,
    max_steps: int,
    closing: bool,
    settings: Settings,
) -> tuple[list[np.ndarray], bool]:
    points = [x0]
    x = x0
    left_start = False
    for _ in range(max_steps):
        t = direction * unit_tangent(g, x, settings.tolerances.gradient)
        y = project_onto(g, x + step * t, settings)
        if (y - x) @ t <= 0:
            raise TracingError(f"continuation reversed near {tuple(x)}")
        if not box.contains(y):
            points.append(y)
            return points, False
        if closing:
            distance = float(np.linalg.norm(y - x0))
            if not left_start and distance > 2 * step:
                left_start = True
            if left_start and distance <= step:
                if (x0 - y) @ (y - x) > 0:
                    points.append(y)
                return points, True
        points.append(y)
        x = y
    raise MaxStepsExceededError(max_steps)


def _as_path(points: list[np.ndarray], index: int, closed: bool, step: float, truncated: bool) -> BoundaryPath:
    nodes = []
    t = 0.0
    for k, q in enumerate(points):
        if k > 0:
            t += float(np.linalg.norm(q - points[k - 1]))
        nodes.append(BoundaryNode(t, Point2.of(q), index))
    total = t + (float(np.linalg.norm(points[0] - points[-1])) if closed else 0.0)
    return BoundaryPath(tuple(nodes), closed, total, step, truncated)


def _sign_change_estimates(values: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Linear-interpolation estimates of zero crossings along grid edges, in grid order."""
    estimates = []
    for axis in (0, 1):
        a = np.take(values, range(values.shape[axis] - 1), axis=axis)
        b = np.take(values, range(1, values.shape[axis]), axis=axis)
        xa1 = np.take(x1, range(x1.shape[axis] - 1), axis=axis)
        xb1 = np.take(x1, range(1, x1.shape[axis]), axis=axis)
        xa2 = np.take(x2, range(x2.shape[axis] - 1), axis=axis)
        xb2 = np.take(x2, range(1, x2.shape[axis]), axis=axis)
        with np.errstate(invalid="ignore"):
            mask = np.isfinite(a) & np.isfinite(b) & (((a <= 0) & (b > 0)) | ((a > 0) & (b <= 0)))
        s = a[mask] / (a[mask] - b[mask])
        e1 = xa1[mask] + s * (xb1[mask] - xa1[mask])
        e2 = xa2[mask] + s * (xb2[mask] - xa2[mask])
        estimates.append(np.stack([e1, e2], axis=-1))
    return np.concatenate(estimates) if estimates else np.empty((0, 2))


def _covered(point: np.ndarray, covered: np.ndarray, radius: float) -> bool:
    if covered.size == 0:
        return False
    return bool(np.min(np.linalg.norm(covered - point, axis=1)) < radius)


def trace_curve(
    g: Expression | SmoothFunction,
    box: Box2,
    step: float,
    index: int = 0,
    settings: Settings | None = None,
) -> list[BoundaryPath]:
    """
    Trace every component of the curve g = 0 inside a box.

    Closed components come back closed; components leaving the box are
    traced in both directions from their seed and flagged truncated, with
    the first point outside the box as each end node.
    """
    settings = resolve(settings)
    function = as_smooth(g)
    n = settings.tracing.seed_grid
    x1, x2 = box.grid(n)
    values = function.values(x1, x2)
    estimates = _sign_change_estimates(values, x1, x2)
    pitch = max((box.hi1 - box.lo1), (box.hi2 - box.lo2)) / (n - 1)
    radius = 2 * max(step, pitch)
    max_steps = math.ceil(settings.tracing.max_steps_factor * box.perimeter / step)

    paths: list[BoundaryPath] = []
    covered = np.empty((0, 2))
    for estimate in estimates:
        if _covered(estimate, covered, radius):
            continue
        try:
            seed = project_onto(function, estimate, settings)
        except Invex2DError as e:
            logger.debug(f"Skipping curve seed {tuple(estimate)}: {e}")
            continue
        if not box.contains(seed) or _covered(seed, covered, radius):
            continue
        forward, closed = _walk_curve(function, seed, 1.0, box, step, max_steps, True, settings)
        if closed:
            path = _as_path(forward, index, True, step, False)
        else:
            backward, _ = _walk_curve(function, seed, -1.0, box, step, max_steps, False, settings)
            path = _as_path(backward[::-1] + forward[1:], index, False, step, True)
        paths.append(path)
        covered = np.vstack([covered, path.points])
        logger.debug(f"Traced curve component {len(paths)}: {len(path)} nodes, closed={path.closed}")
        if len(paths) >= settings.tracing.max_components:
            logger.warning(f"Stopped after {len(paths)} curve components")
            break
    return paths


def find_boundary_seeds(p: Problem2D, settings: Settings | None = None) -> np.ndarray:
    """Estimates of boundary points from sign changes of max_j g_j on a grid over the inflated box."""
    settings = resolve(settings)
    box = p.box.inflated(settings.invexity.box_inflation)
    x1, x2 = box.grid(settings.tracing.seed_grid)
    values = p.constraint_arrays(x1, x2)
    with np.errstate(invalid="ignore"):
        worst = np.max(np.nan_to_num(values, nan=np.inf), axis=0)
    worst[~np.isfinite(worst)] = np.nan
    return _sign_change_estimates(worst, x1, x2)


def _max_constraint(p: Problem2D, x: np.ndarray) -> float:
    return float(max(c.value(x) for c in p.constraints))


def _refine_boundary_seed(p: Problem2D, estimate: np.ndarray, pitch: float, settings: Settings) -> np.ndarray:
    """Move an estimate onto the boundary by bracketing max_j g_j along a short horizontal/vertical segment."""
    for direction in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        a = estimate - pitch * direction
        b = estimate + pitch * direction
        try:
            fa, fb = _max_constraint(p, a), _max_constraint(p, b)
        except EvaluationDomainError:
            continue
        if fa * fb < 0:
            s = brentq(lambda s: _max_constraint(p, a + s * (b - a)), 0.0, 1.0, xtol=1e-15)
            r = a + s * (b - a)
            j = int(np.argmax(p.constraint_values(r)))
            try:
                projected = project_onto(p.constraints[j].function, r, settings)
            except Invex2DError:
                return r
            return projected if is_feasible(p, projected, p.active_tolerance) else r
    return estimate


def trace_feasible_boundary(
    p: Problem2D, step: float | None = None, settings: Settings | None = None
) -> list[BoundaryPath]:
    """
    Trace every boundary component of the feasible set.

    Seeds come from find_boundary_seeds; seeds close to an already traced
    component are skipped.
    """
    settings = resolve(settings)
    step = default_step(p.box, settings) if step is None else step
    box = p.box.inflated(settings.invexity.box_inflation)
    pitch = max(box.hi1 - box.lo1, box.hi2 - box.lo2) / (settings.tracing.seed_grid - 1)
    radius = 2 * max(step, pitch)

    paths: list[BoundaryPath] = []
    covered = np.empty((0, 2))
    for estimate in find_boundary_seeds(p, settings):
        if _covered(estimate, covered, radius):
            continue
        seed = _refine_boundary_seed(p, estimate, pitch, settings)
        if _covered(seed, covered, radius):
            continue
        path = trace_boundary(p, seed, step, settings)
        paths.append(path)
        covered = np.vstack([covered, path.points])
        if len(paths) >= settings.tracing.max_components:
            logger.warning(f"Stopped after {len(paths)} boundary components")
            break
    logger.info(f"Traced {len(paths)} boundary component(s) of {p.name}")
    return paths


def _segments(path: BoundaryPath) -> tuple[np.ndarray, np.ndarray]:
    pts = path.points
    if path.closed:
        return pts, np.roll(pts, -1, axis=0)
    return pts[:-1], pts[1:]


def _orientation(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _on_segment(a: np.ndarray, b: np.ndarray, c: np.ndarray, slack: float) -> np.ndarray:
    return (
        (np.minimum(a[..., 0], b[..., 0]) - slack <= c[..., 0])
        & (c[..., 0] <= np.maximum(a[..., 0], b[..., 0]) + slack)
        & (np.minimum(a[..., 1], b[..., 1]) - slack <= c[..., 1])
        & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]) + slack)
    )


def segments_intersect(
    p1: np.ndarray, p2: np.ndarray, q1: np.ndarray, q2: np.ndarray, slack: float = SEGMENT_SLACK
) -> np.ndarray:
    """Segment-segment intersection predicate, broadcasting over leading axes."""
    o1 = _orientation(p1, p2, q1)
    o2 = _orientation(p1, p2, q2)
    o3 = _orientation(q1, q2, p1)
    o4 = _orientation(q1, q2, p2)
    proper = (((o1 > slack) & (o2 < -slack)) | ((o1 < -slack) & (o2 > slack))) & (
        ((o3 > slack) & (o4 < -slack)) | ((o3 < -slack) & (o4 > slack))
    )
    touching = (
        ((np.abs(o1) <= slack) & _on_segment(p1, p2, q1, slack))
        | ((np.abs(o2) <= slack) & _on_segment(p1, p2, q2, slack))
        | ((np.abs(o3) <= slack) & _on_segment(q1, q2, p1, slack))
        | ((np.abs(o4) <= slack) & _on_segment(q1, q2, p2, slack))
    )
    return proper | touching


def is_simple(path: BoundaryPath, slack: float = SEGMENT_SLACK) -> bool:
    """True iff no two non-adjacent polyline segments intersect."""
    if len(path) < 3:
        raise ValueError("is_simple needs at least 3 nodes")
    starts, ends = _segments(path)
    count = len(starts)
    for k in range(count - 2):
        others = np.arange(k + 2, count)
        if path.closed and k == 0:
            others = others[others != count - 1]
        if others.size == 0:
            continue
        hits = segments_intersect(starts[k], ends[k], starts[others], ends[others], slack)
        if np.any(hits):
            logger.debug(f"Segments {k} and {int(others[np.argmax(hits)])} intersect")
            return False
    return True


def _locate_crossing(
    lf: SmoothFunction, a: np.ndarray, b: np.ndarray, g: SmoothFunction | None, settings: Settings
) -> np.ndarray:
    """Zero of l between nodes a and b, on the curve g = 0 when g is given, else on the chord."""
    chord = float(np.linalg.norm(b - a))
    xtol = 1e-12 / max(chord, 1e-300)
    if g is not None:
        try:
            s = brentq(lambda s: lf.value(project_onto(g, a + s * (b - a), settings)), 0.0, 1.0, xtol=xtol)
            return project_onto(g, a + s * (b - a), settings)
        except (Invex2DError, ValueError) as e:
            logger.debug(f"Crossing refinement on the curve failed near {tuple(a)}: {e}; using the chord")
    s = brentq(lambda s: lf.value(a + s * (b - a)), 0.0, 1.0, xtol=xtol)
    return a + s * (b - a)


def crossing_sequence(
    path: BoundaryPath,
    line: Expression | SmoothFunction,
    objective: Expression | SmoothFunction | None = None,
    p: Problem2D | None = None,
    settings: Settings | None = None,
) -> CrossingSequence:
    """
    Enumerate where the path crosses the line l = 0.

    Crossings are numbered so that even indices cross from l > 0 into l < 0.
    When the problem owning the path is given, each crossing is refined on
    the active constraint curve to 1e-10, otherwise on the polyline. With an
    objective, the maximum of the objective on each arc between consecutive
    crossings is recorded, including the closing arc of a closed path.

    :raises NonAffineLineError: l is not affine
    :raises ConstantOnLineError: the objective gradient is parallel to grad l at every node
    """
    settings = resolve(settings)
    lf = as_smooth(line)
    if not is_affine(lf.expression):
        raise NonAffineLineError(f"line expression is not affine: {lf.expression}")
    f = as_smooth(objective) if objective is not None else None
    pts = path.points
    normal = lf.gradient(pts[0])

    if f is not None:
        gradients = f.gradients(pts[:, 0], pts[:, 1])
        crosses = gradients[:, 0] * normal[1] - gradients[:, 1] * normal[0]
        if np.all(np.abs(crosses) <= 1e-10):
            raise ConstantOnLineError("objective is constant along the line at every sampled node")

    values = lf.values(pts[:, 0], pts[:, 1])
    values = np.where(np.abs(values) <= LINE_ZERO_TOLERANCE, 0.0, values)
    n = len(pts)
    order = list(range(n))
    nonzero = [k for k in order if values[k] != 0.0]
    if not nonzero:
        return CrossingSequence((), (), 0)
    if path.closed:
        first = nonzero[0]
        order = order[first:] + order[:first] + [first]

    found: list[tuple[float, np.ndarray, int, np.ndarray]] = []  # (t, point, direction, tangent)
    tangencies = 0
    prev = order[0]
    pending_zero: int | None = None
    for k in order[1:]:
        if values[k] == 0.0:
            if pending_zero is None:
                pending_zero = k
            continue
        if np.sign(values[k]) != np.sign(values[prev]):
            direction = -1 if values[prev] > 0 else 1
            if pending_zero is not None:
                found.append((path.nodes[pending_zero].t, pts[pending_zero], direction, pts[k] - pts[prev]))
            else:
                a, b = pts[prev], pts[k]
                g = p.constraints[path.nodes[prev].active].function if p is not None else None
                point = _locate_crossing(lf, a, b, g, settings)
                chord = float(np.linalg.norm(b - a))
                s = float(np.linalg.norm(point - a)) / chord if chord > 0 else 0.0
                t_prev = path.nodes[prev].t
                # the closing segment ends at the total length
                t_here = path.total_length if (path.closed and k == 0 and prev == n - 1) else path.nodes[k].t
                found.append((t_prev + min(s, 1.0) * (t_here - t_prev), point, direction, b - a))
        elif pending_zero is not None:
            tangencies += 1
            logger.warning(f"Line touches the boundary without crossing near {tuple(pts[pending_zero])}; skipped")
        pending_zero = None
        prev = k

    found.sort(key=lambda item: item[0])
    crossings = []
    offset = 0 if not found or found[0][2] == -1 else 1
    for idx, (t, point, _, tangent) in enumerate(found):
        k = idx + offset
        sign = int(np.sign(cross(tangent, normal)))
        crossings.append(Crossing(k, float(t), Point2.of(point), "even" if k % 2 == 0 else "odd", sign))

    arc_max: list[float] = []
    if f is not None and len(found) >= 2:
        ts = np.array([node.t for node in path.nodes])
        fvalues = f.values(pts[:, 0], pts[:, 1])
        for (ta, pa, _, _), (tb, pb, _, _) in zip(found, found[1:]):
            inside = fvalues[(ts > ta) & (ts < tb)]
            candidates = [f.value(pa), f.value(pb), *inside.tolist()]
            arc_max.append(float(max(candidates)))
        if path.closed:
            (t_first, p_first, _, _), (t_last, p_last, _, _) = found[0], found[-1]
            inside = fvalues[(ts > t_last) | (ts < t_first)]
            arc_max.append(float(max([f.value(p_last), f.value(p_first), *inside.tolist()])))
    return CrossingSequence(tuple(crossings), tuple(arc_max), tangencies)
