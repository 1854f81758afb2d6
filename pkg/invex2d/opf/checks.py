"""
  Numerical and closed-form checks of the one-line OPF invexity argument:

  - the minimum feasible wR bound (infeasibility of wR < 0.77 w),
  - the closed-form KKT systems of the auxiliary problems for the squared
    voltage, real and reactive power lower bounds,
  - local convexity of the bus-2 thermal limit where it is non-redundant,
  - the full boundary-invexity pipeline on an instance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from invex2d.analysis.boundary import trace_feasible_boundary
from invex2d.analysis.invexity import InvexityReport, check_boundary_invex
from invex2d.analysis.kkt import KKTPoint, find_kkt_points
from invex2d.analysis.oracle import GridSpec, KTInvexVerdict, verify_kt_invex
from invex2d.analysis.problem import is_feasible
from invex2d.config import Settings, resolve
from invex2d.opf.model import LineParams, OPFInstance, build_opf_problem

logger = logging.getLogger(__name__)

INFEASIBLE_WR_FACTOR = 0.77
SQRT_W_FACTOR = 0.82
THERMAL_CONSTANT = 1 / (3 * math.sqrt(3)) + 0.5
FD_STEP = 1e-5
CHUNK_ROWS = 200


@dataclass(frozen=True)
class MinWRReport:
    threshold: float  # closed-form bound below which wR is infeasible
    sqrt_bound: float  # 0.82 sqrt(w)
    linear_bound: float  # 0.77 w
    chain_holds: bool
    grid_resolution: int
    feasible_count: int
    violations: int  # feasible grid points with wR < 0.77 w
    min_feasible_wr: float

    @property
    def passed(self) -> bool:
        return self.chain_holds and self.violations == 0


@dataclass(frozen=True)
class AuxCandidate:
    wr: float
    wi: float
    multiplier: float
    below_bound: bool  # wR < 0 for wbound, wR < w/2 for the injection bounds
    below_threshold: bool  # wR < 0.77 w
    feasible: bool


@dataclass(frozen=True)
class AuxKKTReport:
    which: str
    candidates: tuple[AuxCandidate, ...]
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(c.below_bound and c.below_threshold and not c.feasible for c in self.candidates)


@dataclass(frozen=True)
class ThermalReport:
    threshold: float  # w (1/(3 sqrt 3) + 0.5)
    samples: int
    max_second_derivative: float  # largest finite-difference phi''
    max_analytic_second_derivative: float
    psi_residual: float
    constant: float
    constant_below_bound: bool

    @property
    def passed(self) -> bool:
        return self.max_second_derivative < 0 and self.psi_residual < 1e-10 and self.constant_below_bound


@dataclass(frozen=True)
class OPFInvexResult:
    report: InvexityReport
    kkt_points: tuple[KKTPoint, ...]
    kt: KTInvexVerdict | None


def closed_form_threshold(params: LineParams) -> float:
    """sqrt(v_l^2 w / (tan^2(theta) + 1)) with the wider of the two angle limits."""
    tan2 = max(math.tan(params.theta_lo) ** 2, math.tan(params.theta_hi) ** 2)
    return math.sqrt(params.v_lo**2 * params.w / (tan2 + 1))


def min_wr_bound(params: LineParams, grid: GridSpec | None = None, settings: Settings | None = None) -> MinWRReport:
    """
    Check that no feasible point has wR < 0.77 w, by closed form and by an
    exhaustive grid over the instance box.
    """
    grid = GridSpec(2001) if grid is None else grid
    instance = build_opf_problem(params, settings)
    problem = instance.problem
    box = grid.box or problem.box
    n = grid.resolution
    axis1 = np.linspace(box.lo1, box.hi1, n)
    axis2 = np.linspace(box.lo2, box.hi2, n)
    linear_bound = INFEASIBLE_WR_FACTOR * params.w

    feasible_count = 0
    violations = 0
    min_wr = math.inf
    for start in range(0, n, CHUNK_ROWS):
        x1, x2 = np.meshgrid(axis1[start : start + CHUNK_ROWS], axis2, indexing="ij")
        mask = problem.feasible_mask(x1, x2)
        feasible_count += int(np.count_nonzero(mask))
        violations += int(np.count_nonzero(mask & (x1 < linear_bound)))
        if np.any(mask):
            min_wr = min(min_wr, float(np.min(x1[mask])))

    threshold = closed_form_threshold(params)
    sqrt_bound = SQRT_W_FACTOR * math.sqrt(params.w)
    chain = threshold >= sqrt_bound >= linear_bound
    logger.info(f"wR threshold {threshold:.6f}, {violations} violations among {feasible_count} feasible grid points")
    return MinWRReport(threshold, sqrt_bound, linear_bound, chain, n, feasible_count, violations, min_wr)


# Each system gives wR, wI affine in u = 1/lambda and a residual that is
# quadratic in u.
def _wbound_system(p: LineParams) -> tuple[Callable[[float], tuple[float, float]], Callable[[float, float], float], float]:
    def point(u: float) -> tuple[float, float]:
        return -p.g * (p.c1 + p.c2) * u / 2, p.b * (p.c2 - p.c1) * u / 2

    def residual(wr: float, wi: float) -> float:
        return wr**2 + wi**2 - p.v_lo**2 * p.w

    return point, residual, 0.0


def _pbound_system(p: LineParams) -> tuple[Callable[[float], tuple[float, float]], Callable[[float, float], float], float]:
    def point(u: float) -> tuple[float, float]:
        return p.w / 2 * (1 - p.c1 * u), -(p.b * p.w / (2 * p.g)) * (1 + p.c1 * u)

    def residual(wr: float, wi: float) -> float:
        return (p.g / p.w) * (wr**2 + wi**2) - p.p2_lo - p.g * wr + p.b * wi

    return point, residual, p.w / 2


def _qbound_system(p: LineParams) -> tuple[Callable[[float], tuple[float, float]], Callable[[float, float], float], float]:
    def point(u: float) -> tuple[float, float]:
        slope = p.c1 * p.b + p.c2 * p.admittance_squared / p.b
        return p.w / 2 - p.c1 * p.g * p.w * u / 2, (p.w / 2) * (p.g / p.b + slope * u)

    def residual(wr: float, wi: float) -> float:
        return (wr**2 + wi**2) / p.w + p.q2_lo / p.b - wr - (p.g / p.b) * wi

    return point, residual, p.w / 2


_SYSTEMS = {
    "wbound": (_wbound_system, "v_lo"),
    "pbound": (_pbound_system, "p2_lo"),
    "qbound": (_qbound_system, "q2_lo"),
}


def aux_kkt_points(params: LineParams, which: str, settings: Settings | None = None) -> AuxKKTReport:
    """
    Solve the closed-form KKT system of one auxiliary problem for its
    lambda > 0 candidates and test the infeasibility argument on each.

    A system without real solutions is reported, not raised.
    """
    if which not in _SYSTEMS:
        raise ValueError(f"unknown auxiliary system {which!r}, expected one of {sorted(_SYSTEMS)}")
    build, bound_name = _SYSTEMS[which]
    if not math.isfinite(getattr(params, bound_name)):
        return AuxKKTReport(which, (), f"{bound_name} is infinite, the constraint is absent")
    point, residual, bound = build(params)

    def along(u: float) -> float:
        return residual(*point(u))

    # exact quadratic in u, recovered from three evaluations
    a0 = along(0.0)
    a1 = (along(1.0) - along(-1.0)) / 2
    a2 = (along(1.0) + along(-1.0)) / 2 - a0
    roots = np.roots([a2, a1, a0]) if abs(a2) > 0 else np.roots([a1, a0])
    instance = build_opf_problem(params, settings)
    candidates = []
    for u in roots:
        if abs(u.imag) > 1e-12 * max(1.0, abs(u.real)) or u.real <= 0:
            continue
        wr, wi = point(float(u.real))
        candidates.append(
            AuxCandidate(
                wr=wr,
                wi=wi,
                multiplier=1 / float(u.real),
                below_bound=wr < bound,
                below_threshold=wr < INFEASIBLE_WR_FACTOR * params.w,
                feasible=is_feasible(instance.problem, (wr, wi)),
            )
        )
    note = "" if candidates else "no real solution with positive multiplier"
    logger.info(f"{which}: {len(candidates)} candidate(s) with positive multiplier")
    return AuxKKTReport(which, tuple(candidates), note)


def _phi(params: LineParams, wr: np.ndarray) -> np.ndarray:
    w = params.w
    a = 4 * params.s_u / params.admittance_squared
    r = np.sqrt((2 * wr - w) ** 2 + a)
    return (w / 2) * (2 * wr - w + r) - wr**2


def _psi(params: LineParams, x: float) -> float:
    return x ** (2 / 3) * params.w ** (2 / 3) - x


def thermal_convexity(params: LineParams, samples: int = 1000) -> ThermalReport:
    """
    Concavity of phi(wR) = (w/2)(2 wR - w + R) - wR^2 above the threshold
    w (1/(3 sqrt 3) + 0.5), by second central differences and by the
    analytic form 2 w a / R^3 - 2 with a = 4 s_u / |Y|.
    """
    if samples < 10:
        raise ValueError(f"samples must be at least 10, got {samples}")
    w = params.w
    threshold = w * THERMAL_CONSTANT
    wr = np.linspace(threshold, 1.2 * w, samples + 1)[1:]
    second = (_phi(params, wr + FD_STEP) - 2 * _phi(params, wr) + _phi(params, wr - FD_STEP)) / FD_STEP**2
    a = 4 * params.s_u / params.admittance_squared
    r = np.sqrt((2 * wr - w) ** 2 + a)
    analytic = 2 * w * a / r**3 - 2
    psi_residual = abs(_psi(params, 8 * w**2 / 27) - 4 * w**2 / 27)
    return ThermalReport(
        threshold=threshold,
        samples=samples,
        max_second_derivative=float(np.max(second)),
        max_analytic_second_derivative=float(np.max(analytic)),
        psi_residual=psi_residual,
        constant=THERMAL_CONSTANT,
        constant_below_bound=THERMAL_CONSTANT < INFEASIBLE_WR_FACTOR,
    )


def check_opf_invex(
    params: LineParams,
    settings: Settings | None = None,
    grid: GridSpec | None = None,
    instance: OPFInstance | None = None,
) -> OPFInvexResult:
    """
    Boundary-invexity check of the instance, cross-checked against the grid
    oracle on the KKT points of the traced boundary.
    """
    settings = resolve(settings)
    instance = build_opf_problem(params, settings) if instance is None else instance
    problem = instance.problem
    report = check_boundary_invex(problem, settings)
    paths = trace_feasible_boundary(problem, settings=settings)
    points = tuple(find_kkt_points(problem, paths, settings))
    kt = verify_kt_invex(problem, points, grid, settings=settings) if paths else None
    return OPFInvexResult(report, points, kt)
