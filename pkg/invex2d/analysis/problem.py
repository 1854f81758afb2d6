"""
  Two-dimensional program model: maximise a concave objective subject to
  inequality constraints g_i <= 0 inside a finite box. The four box edges are
  materialised as linear constraints named lo1, hi1, lo2, hi2 so that tracing
  and KKT analysis treat them like any other constraint.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from invex2d.analysis.geometry import Point2
from invex2d.config import Settings, resolve
from invex2d.exceptions import DuplicateConstraintError, UnboundedProblemError
from invex2d.expression import X1, X2, Const, Expression, SmoothFunction, Sub

logger = logging.getLogger(__name__)

CONCAVITY_TOLERANCE = 1e-8
BOX_EDGE_NAMES = ("lo1", "hi1", "lo2", "hi2")


@dataclass(frozen=True)
class Box2:
    lo1: float
    hi1: float
    lo2: float
    hi2: float

    def __post_init__(self) -> None:
        bounds = (self.lo1, self.hi1, self.lo2, self.hi2)
        if not all(math.isfinite(b) for b in bounds):
            raise UnboundedProblemError(f"box bounds must be finite, got {bounds}")
        if not (self.lo1 < self.hi1 and self.lo2 < self.hi2):
            raise ValueError(f"box bounds must satisfy lo < hi per coordinate, got {bounds}")

    @property
    def center(self) -> np.ndarray:
        return np.array([(self.lo1 + self.hi1) / 2, (self.lo2 + self.hi2) / 2])

    @property
    def diagonal(self) -> float:
        return math.hypot(self.hi1 - self.lo1, self.hi2 - self.lo2)

    @property
    def perimeter(self) -> float:
        return 2 * ((self.hi1 - self.lo1) + (self.hi2 - self.lo2))

    def inflated(self, factor: float) -> "Box2":
        """Box scaled by `factor` about its center."""
        c1, c2 = self.center
        r1 = factor * (self.hi1 - self.lo1) / 2
        r2 = factor * (self.hi2 - self.lo2) / 2
        return Box2(c1 - r1, c1 + r1, c2 - r2, c2 + r2)

    def contains(self, x: Sequence[float], tolerance: float = 0.0) -> bool:
        return (
            self.lo1 - tolerance <= x[0] <= self.hi1 + tolerance
            and self.lo2 - tolerance <= x[1] <= self.hi2 + tolerance
        )

    def grid(self, n1: int, n2: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of an n1 x n2 grid including the box edges, indexed [i1, i2]."""
        n2 = n1 if n2 is None else n2
        if n1 == 1 and n2 == 1:
            return np.array([[self.center[0]]]), np.array([[self.center[1]]])
        axis1 = np.linspace(self.lo1, self.hi1, n1)
        axis2 = np.linspace(self.lo2, self.hi2, n2)
        return np.meshgrid(axis1, axis2, indexing="ij")

    def edge_expressions(self) -> list[tuple[str, Expression]]:
        return [
            ("lo1", Sub(Const(self.lo1), X1)),
            ("hi1", Sub(X1, Const(self.hi1))),
            ("lo2", Sub(Const(self.lo2), X2)),
            ("hi2", Sub(X2, Const(self.hi2))),
        ]


@dataclass(frozen=True)
class Constraint:
    """Named inequality g(x) <= 0."""

    name: str
    function: SmoothFunction
    convex_hint: bool | None = None  # True when convex by construction, skips sampling
    box_edge: bool = False

    @property
    def expression(self) -> Expression:
        return self.function.expression

    def value(self, x: Sequence[float]) -> float:
        return self.function.value(x)

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        return self.function.gradient(x)


@dataclass(frozen=True)
class ActiveSet:
    indices: tuple[int, ...]
    names: tuple[str, ...]

    def __contains__(self, index: object) -> bool:
        return index in self.indices

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class ConcavityReport:
    max_eigenvalue: float
    argmax: Point2 | None
    samples: int
    is_concave: bool


@dataclass(frozen=True)
class Problem2D:
    objective: SmoothFunction
    constraints: tuple[Constraint, ...]
    box: Box2
    feasibility_tolerance: float = 1e-8
    active_tolerance: float = 1e-6
    concavity: ConcavityReport | None = None
    name: str = "problem"
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def build(
        cls,
        objective: Expression,
        constraints: Sequence[tuple[str, Expression] | tuple[str, Expression, bool | None]],
        box: Box2,
        name: str = "problem",
        settings: Settings | None = None,
        check_concavity: bool = True,
    ) -> "Problem2D":
        """
        Assemble a problem, appending the four box edges as linear constraints.

        :param objective: objective f, maximised
        :param constraints: (name, g) or (name, g, convex_hint) entries meaning g <= 0
        :param box: finite bounding box
        :raises DuplicateConstraintError: two constraints share a name
        """
        settings = resolve(settings)
        built: list[Constraint] = []
        seen: set[str] = set()
        entries = [(c[0], c[1], c[2] if len(c) > 2 else None) for c in constraints]  # type: ignore[misc]
        for constraint_name, expression, hint in entries:
            if constraint_name in seen:
                raise DuplicateConstraintError(constraint_name)
            seen.add(constraint_name)
            built.append(Constraint(constraint_name, SmoothFunction.from_expression(expression), hint))
        for edge_name, expression in box.edge_expressions():
            if edge_name in seen:
                raise DuplicateConstraintError(edge_name)
            built.append(Constraint(edge_name, SmoothFunction.from_expression(expression), True, box_edge=True))

        f = SmoothFunction.from_expression(objective)
        concavity = None
        warnings: tuple[str, ...] = ()
        if check_concavity:
            concavity = validate_concavity(f, box, settings.run.concavity_samples)
            if not concavity.is_concave:
                message = (
                    f"objective of {name} is not concave on the box "
                    f"(max Hessian eigenvalue {concavity.max_eigenvalue:.3g} at {concavity.argmax})"
                )
                logger.warning(message)
                warnings = (message,)
        return cls(
            objective=f,
            constraints=tuple(built),
            box=box,
            feasibility_tolerance=settings.tolerances.feasibility,
            active_tolerance=settings.tolerances.active,
            concavity=concavity,
            name=name,
            warnings=warnings,
        )

    @property
    def user_constraints(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if not c.box_edge)

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.constraints):
            if c.name == name:
                return i
        raise KeyError(name)

    def constraint_values(self, x: Sequence[float]) -> np.ndarray:
        return np.array([c.value(x) for c in self.constraints])

    def constraint_arrays(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """All constraint values on coordinate arrays, shape (m, ...)."""
        return np.stack([c.function.values(x1, x2) for c in self.constraints])

    def feasible_mask(self, x1: np.ndarray, x2: np.ndarray, tolerance: float | None = None) -> np.ndarray:
        """Vectorised feasibility; points where a constraint is undefined count as infeasible."""
        tolerance = self.feasibility_tolerance if tolerance is None else tolerance
        values = self.constraint_arrays(x1, x2)
        with np.errstate(invalid="ignore"):
            return np.all(np.nan_to_num(values, nan=np.inf) <= tolerance, axis=0)


def is_feasible(p: Problem2D, x: Sequence[float], tolerance: float | None = None) -> bool:
    """
    True iff every constraint, box edges included, satisfies g_i(x) <= tolerance.

    :raises EvaluationDomainError: a constraint is undefined at x
    """
    tolerance = p.feasibility_tolerance if tolerance is None else tolerance
    return all(c.value(x) <= tolerance for c in p.constraints)


def active_set(p: Problem2D, x: Sequence[float], tolerance: float | None = None) -> ActiveSet:
    """Indices of the constraints with |g_i(x)| <= active tolerance, box edges included."""
    tolerance = p.active_tolerance if tolerance is None else tolerance
    indices = tuple(i for i, c in enumerate(p.constraints) if abs(c.value(x)) <= tolerance)
    return ActiveSet(indices, tuple(p.constraints[i].name for i in indices))


def validate_concavity(f: Expression | SmoothFunction, box: Box2, samples: int = 50) -> ConcavityReport:
    """
    Sample the largest Hessian eigenvalue of f on a samples x samples grid.

    This is a semidecision: concave means no sampled eigenvalue exceeds 1e-8.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    function = f if isinstance(f, SmoothFunction) else SmoothFunction.from_expression(f)
    x1, x2 = box.grid(samples)
    hessians = function.hessians(x1, x2).reshape(-1, 2, 2)
    finite = np.all(np.isfinite(hessians), axis=(1, 2))
    if not np.any(finite):
        return ConcavityReport(math.nan, None, samples, False)
    eigenvalues = np.linalg.eigvalsh(hessians[finite])[:, -1]
    k = int(np.argmax(eigenvalues))
    points = np.stack([x1.ravel(), x2.ravel()], axis=-1)[finite]
    max_eigenvalue = float(eigenvalues[k])
    return ConcavityReport(
        max_eigenvalue=max_eigenvalue,
        argmax=Point2.of(points[k]),
        samples=samples,
        is_concave=max_eigenvalue <= CONCAVITY_TOLERANCE,
    )


def load_problem(document: str, name: str = "problem", settings: Settings | None = None) -> Problem2D:
    """
    Build a problem from .nlp2 text.

    A non-concave objective is recorded as a warning on the problem, not raised.

    :raises ProblemFormatError: malformed document
    :raises UnboundedProblemError: infinite var bounds
    :raises DuplicateConstraintError: repeated constraint name
    """
    from invex2d.data_handling.problem_file import parse_document

    parsed = parse_document(document)
    (lo1, hi1), (lo2, hi2) = parsed.bounds["x1"], parsed.bounds["x2"]
    assert parsed.objective is not None
    problem = Problem2D.build(parsed.objective, parsed.constraints, Box2(lo1, hi1, lo2, hi2), name=name, settings=settings)
    logger.info(f"Loaded problem {name} with {len(problem.user_constraints)} constraints")
    return problem
