"""
  One-line AC optimal power flow in the real variables (w^R, w^I), mapped to
  (x1, x2). Bus 1 has fixed squared voltage magnitude w; the flows are

      p12 = g w - g wR - b wI          q12 = -b w + b wR - g wI
      p21 = (g/w) s - g wR + b wI      q21 = -(b/w) s + b wR + g wI

  with s = wR^2 + wI^2. The cost c1 p12 + c2 p21 is minimised, so the
  instance maximises its negation.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from invex2d.analysis.problem import Box2, Problem2D
from invex2d.config import Settings
from invex2d.exceptions import ParameterWindowError
from invex2d.expression import X1, X2, Expression, evaluate

logger = logging.getLogger(__name__)

V_WINDOW = (0.95, 1.05)
THETA_WINDOW = (-math.pi / 6, math.pi / 6)
W_MAX = 1.1025
WINDOW_SLACK = 1e-12


@dataclass(frozen=True)
class LineParams:
    g: float
    b: float
    w: float
    s_u: float
    c1: float
    c2: float
    p1_lo: float = -math.inf
    p1_hi: float = math.inf
    q1_lo: float = -math.inf
    q1_hi: float = math.inf
    p2_lo: float = -math.inf
    p2_hi: float = math.inf
    q2_lo: float = -math.inf
    q2_hi: float = math.inf
    v_lo: float = 0.95
    v_hi: float = 1.05
    theta_lo: float = -math.pi / 6
    theta_hi: float = math.pi / 6

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """
        :raises ParameterWindowError: a parameter lies outside its admissible window
        """
        if self.g <= 0:
            raise ParameterWindowError("g", self.g, "conductance must be positive")
        if self.g**2 + self.b**2 <= 0:
            raise ParameterWindowError("b", self.b, "|Y| must be positive")
        if not 0 < self.w <= W_MAX:
            raise ParameterWindowError("w", self.w, f"must lie in (0, {W_MAX}]")
        if self.s_u <= 0:
            raise ParameterWindowError("s_u", self.s_u, "must be positive")
        if self.c2 < 0:
            raise ParameterWindowError("c2", self.c2, "negative c2 makes the objective non-concave")
        lo, hi = V_WINDOW
        if not lo - WINDOW_SLACK <= self.v_lo < self.v_hi <= hi + WINDOW_SLACK:
            bad = "v_lo" if not lo - WINDOW_SLACK <= self.v_lo < self.v_hi else "v_hi"
            raise ParameterWindowError(bad, getattr(self, bad), f"need {lo} <= v_lo < v_hi <= {hi}")
        lo, hi = THETA_WINDOW
        if not lo - WINDOW_SLACK <= self.theta_lo < self.theta_hi <= hi + WINDOW_SLACK:
            bad = "theta_lo" if not lo - WINDOW_SLACK <= self.theta_lo < self.theta_hi else "theta_hi"
            raise ParameterWindowError(bad, getattr(self, bad), "need -pi/6 <= theta_lo < theta_hi <= pi/6")
        for name in ("p1", "q1", "p2", "q2"):
            low, high = getattr(self, f"{name}_lo"), getattr(self, f"{name}_hi")
            if not low < high:
                raise ParameterWindowError(f"{name}_lo", low, f"must be below {name}_hi={high}")

    @property
    def admittance_squared(self) -> float:
        return self.g**2 + self.b**2

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def canonical_params(**overrides: float) -> LineParams:
    """Regression instance: g=1, b=-5, w=1, s_u=1, c1=1, c2=0.1, injections within +-10."""
    values: dict[str, float] = dict(
        g=1.0, b=-5.0, w=1.0, s_u=1.0, c1=1.0, c2=0.1,
        p1_lo=-10.0, p1_hi=10.0, q1_lo=-10.0, q1_hi=10.0,
        p2_lo=-10.0, p2_hi=10.0, q2_lo=-10.0, q2_hi=10.0,
    )  # fmt: skip
    values.update(overrides)
    return LineParams(**values)


def random_params(rng: np.random.Generator) -> LineParams:
    """Draw line parameters inside the admissible windows."""
    return LineParams(
        g=float(rng.uniform(0.5, 2.0)),
        b=float(rng.uniform(-10.0, -2.0)),
        w=float(rng.uniform(0.95, 1.05)),
        s_u=float(rng.uniform(0.5, 2.0)),
        c1=float(rng.uniform(0.5, 2.0)),
        c2=float(rng.uniform(0.0, 0.5)),
        p1_lo=-10.0, p1_hi=10.0, q1_lo=-10.0, q1_hi=10.0,
        p2_lo=-10.0, p2_hi=10.0, q2_lo=-10.0, q2_hi=10.0,
        v_lo=float(rng.uniform(0.95, 0.97)),
        v_hi=float(rng.uniform(1.03, 1.05)),
        theta_lo=float(rng.uniform(-math.pi / 6, -math.pi / 12)),
        theta_hi=float(rng.uniform(math.pi / 12, math.pi / 6)),
    )  # fmt: skip


@dataclass(frozen=True)
class FlowExpressions:
    p12: Expression
    q12: Expression
    p21: Expression
    q21: Expression


def flow_expressions(params: LineParams) -> FlowExpressions:
    g, b, w = params.g, params.b, params.w
    s = X1**2 + X2**2
    return FlowExpressions(
        p12=g * w - g * X1 - b * X2,
        q12=-b * w + b * X1 - g * X2,
        p21=(g / w) * s - g * X1 + b * X2,
        q21=-(b / w) * s + b * X1 + g * X2,
    )


def line_flows(params: LineParams, wr: float, wi: float) -> tuple[float, float, float, float]:
    """(p12, q12, p21, q21) at (wR, wI), evaluated from the constraint sub-expressions."""
    flows = flow_expressions(params)
    point = (wr, wi)
    return (
        evaluate(flows.p12, point),
        evaluate(flows.q12, point),
        evaluate(flows.p21, point),
        evaluate(flows.q21, point),
    )


@dataclass(frozen=True)
class OPFInstance:
    params: LineParams
    problem: Problem2D
    flows: FlowExpressions

    @property
    def cost(self) -> Expression:
        return self.params.c1 * self.flows.p12 + self.params.c2 * self.flows.p21


def opf_box(params: LineParams) -> Box2:
    r = 1.2 * max(params.w, 1.0)
    return Box2(-r, r, -r, r)


def build_opf_problem(params: LineParams, settings: Settings | None = None) -> OPFInstance:
    """
    Assemble the instance: two thermal limits, one-sided injection bounds for
    every finite bound, squared-voltage window and angle window.

    The bus-1 thermal limit is a sum of squares of affine forms and is
    tagged convex.
    """
    params.validate()
    flows = flow_expressions(params)
    s = X1**2 + X2**2
    constraints: list[tuple[str, Expression, bool | None]] = [
        ("therm1", flows.p12**2 + flows.q12**2 - params.s_u, True),
        ("therm2", flows.p21**2 + flows.q21**2 - params.s_u, None),
    ]
    for name, flow in (("p1", flows.p12), ("q1", flows.q12), ("p2", flows.p21), ("q2", flows.q21)):
        low, high = getattr(params, f"{name}_lo"), getattr(params, f"{name}_hi")
        if math.isfinite(low):
            constraints.append((f"{name}_lo", low - flow, None))
        if math.isfinite(high):
            constraints.append((f"{name}_hi", flow - high, None))
    constraints += [
        ("w_lo", params.v_lo**2 - s / params.w, None),
        ("w_hi", s / params.w - params.v_hi**2, None),
        ("t_lo", math.tan(params.theta_lo) * X1 - X2, None),
        ("t_hi", X2 - math.tan(params.theta_hi) * X1, None),
    ]
    problem = Problem2D.build(-(params.c1 * flows.p12 + params.c2 * flows.p21), constraints, opf_box(params),
                              name="opf", settings=settings)  # fmt: skip
    logger.info(f"Built OPF instance with {len(problem.user_constraints)} constraints")
    return OPFInstance(params, problem, flows)


def loss_identity_residual(params: LineParams, points: Sequence[Sequence[float]]) -> float:
    """Largest |p12 + p21 - (g w + (g/w) s - 2 g wR)| over the given points."""
    worst = 0.0
    for wr, wi in points:
        p12, _, p21, _ = line_flows(params, wr, wi)
        expected = params.g * params.w + (params.g / params.w) * (wr**2 + wi**2) - 2 * params.g * wr
        worst = max(worst, abs(p12 + p21 - expected))
    return worst
