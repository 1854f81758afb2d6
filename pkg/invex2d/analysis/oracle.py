"""
  Brute-force ground truth: dense grid search for the global maximum of the
  objective over the feasible set, optionally refined by a projected
  coordinate search. Used to confirm that every KKT point attains the
  global maximum.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from invex2d.analysis.boundary import BoundaryPath
from invex2d.analysis.geometry import Point2
from invex2d.analysis.kkt import KKTPoint, is_local_max_sampled
from invex2d.analysis.problem import Box2, Problem2D, is_feasible
from invex2d.config import Settings, resolve
from invex2d.exceptions import EmptyFeasibleError, EvaluationDomainError

logger = logging.getLogger(__name__)

CHUNK_POINTS = 400_000
REFINE_MIN_STEP = 1e-10
REFINE_MAX_ITERATIONS = 20_000
_DIRECTIONS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    box: Box2 | None = None  # defaults to the problem box

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError(f"grid resolution must be at least 2, got {self.resolution}")

    def pitch(self, box: Box2) -> float:
        return max(box.hi1 - box.lo1, box.hi2 - box.lo2) / (self.resolution - 1)


@dataclass(frozen=True)
class OracleResult:
    best_point: Point2
    best_value: float
    feasible_count: int
    total_count: int
    refined: bool = False


@dataclass(frozen=True)
class KTInvexVerdict:
    is_kt_invex: bool
    global_max: OracleResult
    gaps: tuple[float, ...]  # best value minus f at each KKT point
    violating: tuple[Point2, ...]


@dataclass(frozen=True)
class BoundaryImplication:
    """Boundary-to-global check of one point; truthy when the implication holds."""

    point: Point2
    precondition_met: bool  # the point is a sampled local maximiser
    premise_holds: bool  # f(x) dominates f on the boundary
    conclusion_holds: bool  # f(x) is within tolerance of the grid maximum

    @property
    def holds(self) -> bool:
        return not (self.precondition_met and self.premise_holds) or self.conclusion_holds

    def __bool__(self) -> bool:
        return self.holds


def _refine(p: Problem2D, x: np.ndarray, step: float) -> np.ndarray:
    """Projected coordinate search: accept improving feasible moves, halve the step otherwise."""
    value = p.objective.value(x)
    for _ in range(REFINE_MAX_ITERATIONS):
        if step < REFINE_MIN_STEP:
            break
        moved = False
        for direction in _DIRECTIONS:
            y = x + step * direction
            try:
                if is_feasible(p, y):
                    candidate = p.objective.value(y)
                    if candidate > value:
                        x, value, moved = y, candidate, True
                        break
            except EvaluationDomainError:
                continue
        if not moved:
            step /= 2
    return x


def grid_global_max(
    p: Problem2D, grid: GridSpec | None = None, refine: bool | None = None, settings: Settings | None = None
) -> OracleResult:
    """
    Evaluate f on a regular grid restricted to the feasible set and return
    the best point. Ties go to the lexicographically smallest point.

    :raises EmptyFeasibleError: no grid point is feasible
    """
    settings = resolve(settings)
    grid = GridSpec(settings.oracle.grid) if grid is None else grid
    refine = settings.oracle.refine if refine is None else refine
    box = grid.box or p.box
    n = grid.resolution
    axis1 = np.linspace(box.lo1, box.hi1, n)
    axis2 = np.linspace(box.lo2, box.hi2, n)
    rows = max(1, CHUNK_POINTS // n)

    best_value = -np.inf
    best_index: tuple[int, int] | None = None
    feasible_count = 0
    for start in range(0, n, rows):
        x1, x2 = np.meshgrid(axis1[start : start + rows], axis2, indexing="ij")
        mask = p.feasible_mask(x1, x2)
        values = p.objective.values(x1, x2)
        values = np.where(mask & np.isfinite(values), values, -np.inf)
        feasible_count += int(np.count_nonzero(mask))
        k = int(np.argmax(values))
        if values.flat[k] > best_value:
            best_value = float(values.flat[k])
            i1, i2 = np.unravel_index(k, values.shape)
            best_index = (start + int(i1), int(i2))

    total = n * n
    if best_index is None:
        raise EmptyFeasibleError(total)
    x = np.array([axis1[best_index[0]], axis2[best_index[1]]])
    logger.debug(f"Grid maximum {best_value:.12g} at {tuple(x)} ({feasible_count}/{total} feasible)")
    if refine:
        x = _refine(p, x, grid.pitch(box))
        best_value = p.objective.value(x)
    return OracleResult(Point2.of(x), float(best_value), feasible_count, total, refine)


def verify_kt_invex(
    p: Problem2D,
    kkt_points: Sequence[KKTPoint],
    grid: GridSpec | None = None,
    tolerance: float | None = None,
    settings: Settings | None = None,
) -> KTInvexVerdict:
    """
    KT-invexity holds numerically when every KKT point is within `tolerance`
    of the grid maximum. Vacuous with no KKT points.
    """
    settings = resolve(settings)
    tolerance = settings.oracle.gap_tolerance if tolerance is None else tolerance
    best = grid_global_max(p, grid, settings=settings)
    gaps = tuple(best.best_value - q.objective_value for q in kkt_points)
    violating = tuple(q.location for q, gap in zip(kkt_points, gaps) if gap > tolerance)
    if violating:
        logger.warning(f"{len(violating)} KKT point(s) of {p.name} fall short of the grid maximum")
    return KTInvexVerdict(not violating, best, gaps, violating)


def boundary_to_global(
    p: Problem2D,
    x: Sequence[float],
    paths: Sequence[BoundaryPath],
    grid: GridSpec | None = None,
    tolerance: float | None = None,
    settings: Settings | None = None,
) -> BoundaryImplication:
    """
    Check that a local maximiser dominating f on the traced boundary is a
    global maximiser. Points that are not sampled local maxima do not meet
    the precondition and pass vacuously.
    """
    settings = resolve(settings)
    tolerance = settings.oracle.gap_tolerance if tolerance is None else tolerance
    value = p.objective.value(x)
    precondition = is_local_max_sampled(p, x, settings)
    nodes = np.concatenate([path.points for path in paths]) if paths else np.empty((0, 2))
    boundary_values = p.objective.values(nodes[:, 0], nodes[:, 1])
    premise = bool(np.all(value >= boundary_values - 1e-9))
    conclusion = True
    if precondition and premise:
        conclusion = value >= grid_global_max(p, grid, settings=settings).best_value - tolerance
    return BoundaryImplication(Point2.of(x), precondition, premise, conclusion)
