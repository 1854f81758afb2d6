"""
  Reader and writer for the line-oriented .nlp2 problem format:

      var x1 in [<lo>, <hi>]
      var x2 in [<lo>, <hi>]
      maximize <expression>
      constraint <name>: <expression> <= 0

  '#' starts a comment. Both var lines and exactly one maximize line are
  required; any number of constraint lines may follow.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from invex2d.exceptions import ExpressionSyntaxError, ProblemFormatError
from invex2d.expression import Expression, format_expression, parse_expression

if TYPE_CHECKING:
    from invex2d.analysis.problem import Problem2D

logger = logging.getLogger(__name__)

_NUMBER = r"[-+]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
_VAR_RE = re.compile(rf"^var\s+(x[12])\s+in\s+\[\s*({_NUMBER})\s*,\s*({_NUMBER})\s*\]$")
_MAXIMIZE_RE = re.compile(r"^maximize\s+(.+)$")
_CONSTRAINT_RE = re.compile(r"^constraint\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.+?)\s*<=\s*0(?:\.0*)?$")


@dataclass
class ProblemDocument:
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    objective: Expression | None = None
    constraints: list[tuple[str, Expression]] = field(default_factory=list)


def _parse_formula(text: str, line_number: int) -> Expression:
    try:
        return parse_expression(text)
    except ExpressionSyntaxError as e:
        raise ProblemFormatError(f"invalid expression {text!r}: {e.args[0]}", line_number) from e


def parse_document(text: str) -> ProblemDocument:
    """
    Parse .nlp2 text into its parts without building the problem.

    :raises ProblemFormatError: malformed line, missing or repeated maximize/var line
    """
    document = ProblemDocument()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _VAR_RE.match(line):
            name = m.group(1)
            if name in document.bounds:
                raise ProblemFormatError(f"repeated var line for {name}", line_number)
            document.bounds[name] = (float(m.group(2)), float(m.group(3)))
        elif m := _MAXIMIZE_RE.match(line):
            if document.objective is not None:
                raise ProblemFormatError("more than one maximize line", line_number)
            document.objective = _parse_formula(m.group(1), line_number)
        elif m := _CONSTRAINT_RE.match(line):
            document.constraints.append((m.group(1), _parse_formula(m.group(2), line_number)))
        else:
            raise ProblemFormatError(f"unrecognised line {line!r}", line_number)

    if document.objective is None:
        raise ProblemFormatError("missing maximize line")
    for name in ("x1", "x2"):
        if name not in document.bounds:
            raise ProblemFormatError(f"missing var line for {name}")
    logger.debug(f"Parsed problem document with {len(document.constraints)} constraints")
    return document


def format_problem(p: "Problem2D") -> str:
    """Write a problem back in .nlp2 form; box edges come from the var lines."""
    box = p.box
    lines = [
        f"# {p.name}",
        f"var x1 in [{float(box.lo1)!r}, {float(box.hi1)!r}]",
        f"var x2 in [{float(box.lo2)!r}, {float(box.hi2)!r}]",
        f"maximize {format_expression(p.objective.expression)}",
    ]
    for c in p.user_constraints:
        lines.append(f"constraint {c.name}: {format_expression(c.expression)} <= 0")
    return "\n".join(lines) + "\n"
