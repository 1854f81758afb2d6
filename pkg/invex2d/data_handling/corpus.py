"""
  Built-in problem instances: a few named documents and a seeded generator
  of convex and crescent-shaped instances with a known verdict.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from invex2d.analysis.problem import Problem2D, load_problem
from invex2d.config import Settings

logger = logging.getLogger(__name__)

NAMED_INSTANCES = {
    "unit-disk": """\
# maximise x1 over the unit disk
var x1 in [-2, 2]
var x2 in [-2, 2]
maximize x1
constraint disk: x1^2 + x2^2 - 1 <= 0
""",
    "unit-box": """\
# box only, no explicit constraints
var x1 in [0, 1]
var x2 in [0, 1]
maximize -(x1 - 2)^2 - (x2 - 2)^2
""",
    "anti-disk": """\
# outside the unit disk; (0, 1) is a spurious KKT point
var x1 in [-2, 2]
var x2 in [-2, 2]
maximize -x2
constraint hole: 1 - x1^2 - x2^2 <= 0
""",
    "crescent": """\
# disk of radius 2 minus a disk of radius 1.5 centred at (-1, 0)
var x1 in [-3, 3]
var x2 in [-3, 3]
maximize x1
constraint outer: x1^2 + x2^2 - 4 <= 0
constraint hole: 2.25 - (x1 + 1)^2 - x2^2 <= 0
""",
    "half-crescent": """\
# right half plane outside the unit disk
var x1 in [-2, 2]
var x2 in [-2, 2]
maximize x1
constraint hole: 1 - x1^2 - x2^2 <= 0
constraint half: -x1 <= 0
""",
}

# expected outcome of the boundary check on the named instances
NAMED_BOUNDARY_INVEX = {
    "unit-disk": True,
    "unit-box": True,
    "anti-disk": False,
    "crescent": True,
    "half-crescent": True,
}


@dataclass(frozen=True)
class CorpusInstance:
    name: str
    kind: str  # "named", "convex" or "crescent"
    document: str
    boundary_invex: bool

    def load(self, settings: Settings | None = None) -> Problem2D:
        return load_problem(self.document, self.name, settings)


def named_instance(name: str, settings: Settings | None = None) -> Problem2D:
    if name not in NAMED_INSTANCES:
        raise KeyError(f"unknown built-in instance {name!r}, expected one of {sorted(NAMED_INSTANCES)}")
    return load_problem(NAMED_INSTANCES[name], name, settings)


def _convex_document(rng: np.random.Generator) -> str:
    p, q = rng.uniform(-1.0, 1.0, size=2)
    r = float(rng.uniform(0.5, 1.5))
    a, c = rng.uniform(-2.0, 2.0, size=2)
    phi = float(rng.uniform(0, 2 * math.pi))
    alpha, beta = math.cos(phi), math.sin(phi)
    delta = float(rng.uniform(-0.3 * r, 0.5 * r))
    half = r + 1.0
    return (
        f"var x1 in [{p - half!r}, {p + half!r}]\n"
        f"var x2 in [{q - half!r}, {q + half!r}]\n"
        f"maximize -(x1 - {a!r})^2 - (x2 - {c!r})^2\n"
        f"constraint disk: (x1 - {p!r})^2 + (x2 - {q!r})^2 - {r * r!r} <= 0\n"
        f"constraint cut: {alpha!r} * (x1 - {p!r}) + {beta!r} * (x2 - {q!r}) - {delta!r} <= 0\n"
    )


def _crescent_document(rng: np.random.Generator) -> str:
    radius = float(rng.uniform(1.5, 2.5))
    while True:
        d = float(rng.uniform(0.8, 1.1)) * radius
        r = float(rng.uniform(0.5, 0.8)) * radius
        if d + r > 1.15 * radius and d - r < 0.9 * radius:
            break
    phi = float(rng.uniform(-0.5, 0.5))
    a1, a2 = math.cos(phi), math.sin(phi)
    c1, c2 = -d * a1, -d * a2
    half = max(radius, d + r) + 0.5
    return (
        f"var x1 in [{-half!r}, {half!r}]\n"
        f"var x2 in [{-half!r}, {half!r}]\n"
        f"maximize {a1!r} * x1 + {a2!r} * x2\n"
        f"constraint outer: x1^2 + x2^2 - {radius * radius!r} <= 0\n"
        f"constraint hole: {r * r!r} - (x1 - {c1!r})^2 - (x2 - {c2!r})^2 <= 0\n"
    )


def generate_corpus(count: int = 20, seed: int = 0) -> list[CorpusInstance]:
    """Alternate convex and crescent instances; all are boundary-invex by construction."""
    rng = np.random.default_rng(seed)
    instances = []
    for k in range(count):
        if k % 2 == 0:
            instances.append(CorpusInstance(f"convex-{k:02d}", "convex", _convex_document(rng), True))
        else:
            instances.append(CorpusInstance(f"crescent-{k:02d}", "crescent", _crescent_document(rng), True))
    logger.debug(f"Generated {count} corpus instances from seed {seed}")
    return instances


def builtin_corpus() -> list[CorpusInstance]:
    return [CorpusInstance(name, "named", text, NAMED_BOUNDARY_INVEX[name]) for name, text in NAMED_INSTANCES.items()]
