from typing import Any, Sequence


class Invex2DError(Exception):
    """Base exception for all invex2d errors"""

    pass


class ConfigurationError(Invex2DError):
    """Unknown or malformed entry in a settings file"""

    def __init__(self, msg: str, key: str) -> None:
        super().__init__(msg, key)
        self.key = key


class ExpressionSyntaxError(Invex2DError):
    """Expression text does not follow the formula grammar"""

    def __init__(self, msg: str, position: int) -> None:
        super().__init__(f"{msg} at position {position}", position)
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    """Identifier other than x1, x2 or a supported function name"""

    def __init__(self, name: str, position: int) -> None:
        super().__init__(f'unknown identifier "{name}"', position)
        self.name = name


class EvaluationDomainError(Invex2DError):
    """Expression evaluated outside its natural domain (log/sqrt of negative, division by zero)"""

    def __init__(self, msg: str, subexpression: Any) -> None:
        super().__init__(msg, subexpression)
        self.subexpression = subexpression


class ProblemFormatError(Invex2DError):
    """Problem document violates the .nlp2 format"""

    def __init__(self, msg: str, line_number: int | None = None) -> None:
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"{msg}{where}", line_number)
        self.line_number = line_number


class UnboundedProblemError(Invex2DError):
    """Problem has no finite bounding box"""

    pass


class DuplicateConstraintError(Invex2DError):
    """Two constraints share the same name"""

    def __init__(self, name: str) -> None:
        super().__init__(f"duplicate constraint name: {name}", name)
        self.name = name


class DegenerateGradientError(Invex2DError):
    """Constraint gradient vanishes at a point (LICQ fails there)"""

    def __init__(self, point: Sequence[float], norm: float) -> None:
        super().__init__(f"degenerate gradient (norm {norm:.3e}) at {tuple(point)}", point, norm)
        self.point = tuple(point)
        self.norm = norm


class LICQViolationError(Invex2DError):
    """Gradients of two active constraints are parallel"""

    def __init__(self, point: Sequence[float], i: int, j: int, cross: float) -> None:
        super().__init__(f"LICQ violated at {tuple(point)} for constraints {i}, {j} (cross {cross:.3e})", point, i, j)
        self.point = tuple(point)
        self.i = i
        self.j = j
        self.cross = cross


class DegenerateVertexError(Invex2DError):
    """More than two non-redundant constraints are active at a point"""

    def __init__(self, point: Sequence[float], active: Sequence[int]) -> None:
        super().__init__(f"{len(active)} non-redundant active constraints at {tuple(point)}", point, active)
        self.point = tuple(point)
        self.active = tuple(active)


class TracingError(Invex2DError):
    """Boundary continuation failed"""

    pass


class NotOnBoundaryError(TracingError):
    """Start point is infeasible or has no active constraint"""

    def __init__(self, msg: str, point: Sequence[float]) -> None:
        super().__init__(msg, point)
        self.point = tuple(point)


class MaxStepsExceededError(TracingError):
    """Continuation did not close within the step budget"""

    def __init__(self, steps: int) -> None:
        super().__init__(f"boundary did not close within {steps} steps", steps)
        self.steps = steps


class CornerOrientationError(TracingError):
    """Corner gradient cross product is not positive"""

    def __init__(self, point: Sequence[float], value: float) -> None:
        super().__init__(f"corner orientation violated at {tuple(point)} (cross {value:.3e})", point, value)
        self.point = tuple(point)
        self.value = value


class StepHalvingExhaustedError(TracingError):
    """Several constraints kept switching within one predictor step"""

    def __init__(self, point: Sequence[float]) -> None:
        super().__init__(f"could not resolve constraint switch near {tuple(point)}", point)
        self.point = tuple(point)


class NonAffineLineError(Invex2DError):
    """Reference line expression is not affine"""

    pass


class ConstantOnLineError(Invex2DError):
    """Objective is constant along the reference line"""

    pass


class EmptyFeasibleError(Invex2DError):
    """No feasible point found on the oracle grid"""

    def __init__(self, total_count: int) -> None:
        super().__init__(f"no feasible point among {total_count} grid points", total_count)
        self.total_count = total_count


class ParameterWindowError(Invex2DError):
    """Line parameter outside its admissible window"""

    def __init__(self, name: str, value: Any, msg: str = "") -> None:
        super().__init__(f"parameter {name}={value} outside admissible window{': ' + msg if msg else ''}", name, value)
        self.name = name
        self.value = value
