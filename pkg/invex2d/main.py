"""
  Command-line surface of invex2d.

      invex2d trace <file> [--step S] [--out boundary.csv]
      invex2d kkt <file>
      invex2d check <file> --mode {weak,boundary,kt-empirical}
      invex2d oracle <file> [--grid N]
      invex2d opf [--g G --b B ...] --verify {min-wr,aux-kkt,thermal,invex,all}

  <file> is a .nlp2 document or builtin:<name> for one of the named
  instances. Exit codes: 0 check passed, 1 check violated, 2 inconclusive or
  error, 64 usage error.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from invex2d import __version__
from invex2d.analysis.boundary import corner_check, is_simple, trace_feasible_boundary
from invex2d.analysis.invexity import InvexityReport, Verdict, check_boundary_invex, check_weak
from invex2d.analysis.kkt import find_kkt_points, kkt_gap
from invex2d.analysis.oracle import GridSpec, grid_global_max, verify_kt_invex
from invex2d.analysis.problem import Problem2D, load_problem
from invex2d.config import Settings, load_settings
from invex2d.data_handling.corpus import NAMED_INSTANCES
from invex2d.data_handling.export import write_boundary_csv
from invex2d.data_handling.report import RunReport, input_digest
from invex2d.exceptions import Invex2DError
from invex2d.opf import (
    LINE_PARAM_FLAG_ALIASES,
    LINE_PARAM_TYPE,
    LineParams,
    aux_kkt_points,
    build_opf_problem,
    canonical_params,
    check_opf_invex,
    min_wr_bound,
    thermal_convexity,
)

logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

LOG_ENV_VAR = "INVEX2D_LOG"
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
BUILTIN_PREFIX = "builtin:"
OPF_CHECKS = ("min-wr", "aux-kkt", "thermal", "invex")


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flag(name: str) -> list[str]:
    flags = ["--" + name.replace("_", "-")]
    if name in LINE_PARAM_FLAG_ALIASES:
        flags.append(LINE_PARAM_FLAG_ALIASES[name])
    return flags


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--seed", type=int, default=None, help="seed of all randomised steps (default from config, 0)")
    common.add_argument("--config", type=Path, default=None, help="settings file in config.toml format")
    common.add_argument("--verbose", action="store_true", help="debug logging regardless of INVEX2D_LOG")

    parser = _ArgumentParser(prog="invex2d", description="Kuhn-Tucker invexity checks for 2D nonlinear programs")
    parser.add_argument("--version", action="version", version=f"invex2d {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    trace = commands.add_parser("trace", parents=[common], help="trace the boundary of the feasible set")
    trace.add_argument("problem")
    trace.add_argument("--step", type=float, default=None)
    trace.add_argument("--out", type=Path, default=None, help="CSV file for the traced nodes")

    kkt = commands.add_parser("kkt", parents=[common], help="enumerate and classify KKT points")
    kkt.add_argument("problem")

    check = commands.add_parser("check", parents=[common], help="run an invexity check")
    check.add_argument("problem")
    check.add_argument("--mode", choices=("weak", "boundary", "kt-empirical"), required=True)

    oracle = commands.add_parser("oracle", parents=[common], help="grid search for the global maximum")
    oracle.add_argument("problem")
    oracle.add_argument("--grid", type=int, default=None)

    opf = commands.add_parser("opf", parents=[common], help="one-line OPF instance checks")
    for name, param_type in LINE_PARAM_TYPE.items():
        match param_type:
            case "float":
                opf.add_argument(*_flag(name), dest=name, type=float, default=None)
            case _:
                raise ValueError(f"Unknown parameter type {param_type} for {name}")
    opf.add_argument("--verify", choices=(*OPF_CHECKS, "all"), default="all")
    return parser


def configure_logging(verbose: bool = False) -> None:
    name = os.environ.get(LOG_ENV_VAR, "error").lower()
    level = LOG_LEVELS.get(name)
    logging.basicConfig(
        level=logging.DEBUG if verbose else (level or logging.ERROR),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if level is None:
        logger.warning(f"Unknown {LOG_ENV_VAR} value {name!r}, using error")


def _read_source(source: str) -> tuple[str, str]:
    """Document text and problem name of a file path or builtin:<name>."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX) :]
        if name not in NAMED_INSTANCES:
            raise ValueError(f"unknown built-in instance {name!r}, expected one of {sorted(NAMED_INSTANCES)}")
        return NAMED_INSTANCES[name], name
    path = Path(source)
    return path.read_text(encoding="utf-8"), path.stem


def _settings(args: argparse.Namespace) -> Settings:
    settings = load_settings(args.config)
    if args.seed is not None:
        settings = replace(settings, run=replace(settings.run, seed=args.seed))
    return settings


def _load(args: argparse.Namespace, report: RunReport, settings: Settings) -> Problem2D:
    text, name = _read_source(args.problem)
    report.input_digest = input_digest(text)
    with report.timed("load"):
        problem = load_problem(text, name, settings)
    if problem.warnings:
        report.details["warnings"] = list(problem.warnings)
    return problem


def _run_trace(args: argparse.Namespace, report: RunReport, settings: Settings) -> int:
    problem = _load(args, report, settings)
    with report.timed("trace"):
        paths = trace_feasible_boundary(problem, args.step, settings)
    components = []
    for path in paths:
        corners = [corner_check(problem, node) for node in path.corners]
        components.append(
            {
                "nodes": len(path),
                "closed": path.closed,
                "truncated": path.truncated,
                "length": path.total_length,
                "step": path.step,
                "closure_gap": path.closure_gap,
                "simple": is_simple(path),
                "corners": [node.point for node in path.corners],
                "min_corner_check": min(corners) if corners else None,
            }
        )
    report.details["components"] = components
    if args.out is not None:
        report.details["rows_written"] = write_boundary_csv(problem, paths, args.out)
    ok = bool(paths) and all(c["closed"] and c["simple"] for c in components)
    report.verdicts["trace"] = "closed-simple" if ok else "incomplete"
    return EXIT_PASSED if ok else EXIT_INCONCLUSIVE


def _kkt_details(problem: Problem2D, points: Sequence) -> list[dict]:
    return [
        {
            "location": q.location,
            "active": list(q.active.names),
            "multipliers": {problem.constraints[i].name: q.multiplier(i) for i in q.active.indices},
            "objective_value": q.objective_value,
            "residual": q.residual,
            "classification": q.classification,
        }
        for q in points
    ]


def _run_kkt(args: argparse.Namespace, report: RunReport, settings: Settings) -> int:
    problem = _load(args, report, settings)
    with report.timed("trace"):
        paths = trace_feasible_boundary(problem, settings=settings)
    with report.timed("kkt"):
        points = find_kkt_points(problem, paths, settings)
    report.details["kkt_points"] = _kkt_details(problem, points)
    report.details["kkt_gap"] = kkt_gap(points)
    report.verdicts["kkt"] = f"{len(points)} point(s)"
    return EXIT_PASSED


def _invexity_exit(report: InvexityReport) -> int:
    match report.verdict:
        case Verdict.BOUNDARY_INVEX | Verdict.WEAKLY_BOUNDARY_INVEX:
            return EXIT_PASSED
        case Verdict.INCONCLUSIVE:
            return EXIT_INCONCLUSIVE
        case _:
            return EXIT_VIOLATED


def _record_invexity(problem: Problem2D, result: InvexityReport, report: RunReport) -> None:
    report.verdicts[result.mode] = result.verdict.value
    report.details["nonconvex_constraints"] = [problem.constraints[i].name for i in result.nonconvex]
    report.details["evidence"] = [
        {"constraint": ev.name, "holds": ev.holds, "points": len(ev.evaluations), "note": ev.note}
        for ev in result.evidence
    ]
    if result.notes:
        report.details["notes"] = list(result.notes)
    for w in result.witnesses:
        report.add_witness(problem.constraints[w.constraint].name, w.point, w.multiplier, clauses=w.clauses)


def _run_check(args: argparse.Namespace, report: RunReport, settings: Settings) -> int:
    problem = _load(args, report, settings)
    if args.mode in ("weak", "boundary"):
        check = check_weak if args.mode == "weak" else check_boundary_invex
        with report.timed(args.mode):
            result = check(problem, settings)
        _record_invexity(problem, result, report)
        return _invexity_exit(result)

    with report.timed("trace"):
        paths = trace_feasible_boundary(problem, settings=settings)
    with report.timed("kkt"):
        points = find_kkt_points(problem, paths, settings)
    with report.timed("oracle"):
        verdict = verify_kt_invex(problem, points, settings=settings)
    report.verdicts["kt-empirical"] = "kt-invex" if verdict.is_kt_invex else "violated"
    report.details["global_max"] = verdict.global_max
    report.details["kkt_gaps"] = list(verdict.gaps)
    for q, gap in zip(points, verdict.gaps):
        if gap > settings.oracle.gap_tolerance:
            names = ",".join(q.active.names) or "interior"
            multiplier = max(q.multipliers, default=0.0)
            report.add_witness(names, q.location, multiplier, gap=gap)
    return EXIT_PASSED if verdict.is_kt_invex else EXIT_VIOLATED


def _run_oracle(args: argparse.Namespace, report: RunReport, settings: Settings) -> int:
    problem = _load(args, report, settings)
    grid = GridSpec(args.grid if args.grid is not None else settings.oracle.grid)
    with report.timed("oracle"):
        result = grid_global_max(problem, grid, settings=settings)
    report.details["global_max"] = result
    report.verdicts["oracle"] = f"{result.best_value:.10g}"
    return EXIT_PASSED


def _line_params(args: argparse.Namespace) -> LineParams:
    overrides = {name: getattr(args, name) for name in LINE_PARAM_TYPE if getattr(args, name) is not None}
    return canonical_params(**overrides)


def _run_opf(args: argparse.Namespace, report: RunReport, settings: Settings) -> int:
    params = _line_params(args)
    report.input_digest = input_digest(json.dumps(params.as_dict(), sort_keys=True))
    report.details["params"] = params.as_dict()
    checks = OPF_CHECKS if args.verify == "all" else (args.verify,)
    codes = []
    for name in checks:
        with report.timed(name):
            match name:
                case "min-wr":
                    result = min_wr_bound(params, settings=settings)
                    report.details[name] = result
                    codes.append(EXIT_PASSED if result.passed else EXIT_VIOLATED)
                    report.verdicts[name] = "pass" if result.passed else "violated"
                case "aux-kkt":
                    results = [aux_kkt_points(params, which, settings) for which in ("wbound", "pbound", "qbound")]
                    report.details[name] = results
                    passed = all(r.passed for r in results)
                    codes.append(EXIT_PASSED if passed else EXIT_VIOLATED)
                    report.verdicts[name] = "pass" if passed else "violated"
                case "thermal":
                    thermal = thermal_convexity(params)
                    report.details[name] = thermal
                    codes.append(EXIT_PASSED if thermal.passed else EXIT_VIOLATED)
                    report.verdicts[name] = "pass" if thermal.passed else "violated"
                case "invex":
                    instance = build_opf_problem(params, settings)
                    outcome = check_opf_invex(params, settings, instance=instance)
                    code = _invexity_exit(outcome.report)
                    if code == EXIT_PASSED and outcome.kt is not None and not outcome.kt.is_kt_invex:
                        code = EXIT_VIOLATED
                    codes.append(code)
                    report.verdicts[name] = outcome.report.verdict.value
                    report.details["kt_invex"] = None if outcome.kt is None else outcome.kt.is_kt_invex
                    for w in outcome.report.witnesses:
                        constraint_name = instance.problem.constraints[w.constraint].name
                        report.add_witness(constraint_name, w.point, w.multiplier, clauses=w.clauses)
    if EXIT_INCONCLUSIVE in codes:
        return EXIT_INCONCLUSIVE
    return EXIT_VIOLATED if EXIT_VIOLATED in codes else EXIT_PASSED


_COMMANDS = {
    "trace": _run_trace,
    "kkt": _run_kkt,
    "check": _run_check,
    "oracle": _run_oracle,
    "opf": _run_opf,
}


def execute(args: argparse.Namespace, argv: Sequence[str]) -> RunReport:
    """Run a parsed command. Errors are logged and mapped to exit code 2, never raised."""
    report = RunReport(command=list(argv), seed=0)
    try:
        settings = _settings(args)
        report.seed = settings.run.seed
        report.exit_code = _COMMANDS[args.command](args, report, settings)
    except (Invex2DError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        report.details["error"] = f"{type(e).__name__}: {e}"
        report.exit_code = EXIT_INCONCLUSIVE
    return report


def run(argv: Sequence[str]) -> tuple[int, RunReport | None]:
    """Parse and run; usage errors return (64, None)."""
    try:
        args = build_parser().parse_args(list(argv))
    except SystemExit as e:
        return (e.code if isinstance(e.code, int) else EXIT_USAGE), None
    report = execute(args, argv)
    return report.exit_code, report


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    configure_logging(args.verbose)
    report = execute(args, argv)
    print(report.to_json() if args.json else report.to_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
