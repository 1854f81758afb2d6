import csv
import logging
from pathlib import Path
from typing import Sequence, TextIO

from invex2d.analysis.boundary import BoundaryPath
from invex2d.analysis.problem import Problem2D

logger = logging.getLogger(__name__)

BOUNDARY_COLUMNS = ("t", "x1", "x2", "active", "corner")


def write_boundary_rows(p: Problem2D, paths: Sequence[BoundaryPath], stream: TextIO) -> int:
    """Write traced boundary nodes as CSV; `active` holds the constraint name. Returns the row count."""
    writer = csv.writer(stream)
    writer.writerow(BOUNDARY_COLUMNS)
    rows = 0
    for path in paths:
        for node in path.nodes:
            writer.writerow(
                [repr(node.t), repr(node.point.x1), repr(node.point.x2), p.constraints[node.active].name, int(node.is_corner)]
            )
            rows += 1
    return rows


def write_boundary_csv(p: Problem2D, paths: Sequence[BoundaryPath], path: str | Path) -> int:
    with open(path, "w", newline="", encoding="utf-8") as f:
        rows = write_boundary_rows(p, paths, f)
    logger.info(f"Wrote {rows} boundary nodes to {path}")
    return rows


def read_boundary_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
