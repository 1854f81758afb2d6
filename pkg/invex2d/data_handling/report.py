"""
  Run reports of the command-line tool. A report carries the command echo,
  the SHA-256 digest of the input document, the seed, the verdicts and
  witness points, per-stage timings and the tool version. Everything except
  the timings is deterministic for a fixed input and seed.
"""

import dataclasses
import enum
import hashlib
import json
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from invex2d import __version__

logger = logging.getLogger(__name__)


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def to_plain(obj: Any) -> Any:
    """
    Recursively convert dataclasses, enums, numpy scalars and arrays into
    JSON-serialisable Python values. Non-finite floats become strings.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer, np.floating)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclass
class RunReport:
    command: list[str]
    seed: int
    input_digest: str | None = None
    version: str = __version__
    verdicts: dict[str, str] = field(default_factory=dict)
    witnesses: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    exit_code: int = 0

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = time.perf_counter() - start
            logger.debug(f"Stage {stage} took {self.timings[stage]:.3f}s")

    def add_witness(self, constraint: str, point: tuple[float, float], multiplier: float, **extra: Any) -> None:
        self.witnesses.append({"constraint": constraint, "point": list(point), "multiplier": multiplier, **extra})

    def to_dict(self) -> dict[str, Any]:
        return to_plain(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"invex2d {self.version}: {' '.join(self.command)}"]
        if self.input_digest:
            lines.append(f"input sha256: {self.input_digest}")
        lines.append(f"seed: {self.seed}")
        for name, verdict in self.verdicts.items():
            lines.append(f"{name}: {verdict}")
        for witness in self.witnesses:
            x1, x2 = witness["point"]
            lines.append(f"witness on {witness['constraint']}: ({x1:.10g}, {x2:.10g}), multiplier {witness['multiplier']:.6g}")
        for key, value in self.details.items():
            lines.append(f"{key}: {_format_detail(to_plain(value))}")
        if self.timings:
            lines.append("timings: " + ", ".join(f"{k} {v:.3f}s" for k, v in self.timings.items()))
        lines.append(f"exit code: {self.exit_code}")
        return "\n".join(lines)


def _format_detail(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)
