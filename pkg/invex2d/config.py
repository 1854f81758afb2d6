import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from invex2d.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-8
    active: float = 1e-6
    gradient: float = 1e-9
    multiplier: float = 1e-8
    stationarity: float = 1e-6


@dataclass(frozen=True)
class TracingSettings:
    step_factor: float = 1e-2  # of the box diagonal
    corrector_residual: float = 1e-10
    corner_residual: float = 1e-8
    newton_max_iterations: int = 50
    max_halvings: int = 20
    max_steps_factor: float = 10.0
    seed_grid: int = 101
    max_components: int = 16


@dataclass(frozen=True)
class KKTSettings:
    dedup_radius: float = 1e-6
    refine_tolerance: float = 1e-10
    random_restarts: int = 8
    sample_radii: tuple[float, ...] = (1e-4, 1e-3)
    sample_directions: int = 64
    improvement_tolerance: float = 1e-10
    curvature_tolerance: float = 1e-8


@dataclass(frozen=True)
class InvexitySettings:
    box_inflation: float = 1.05
    aux_step_factor: float = 2e-3
    nonconvexity_samples: int = 200
    strictness_tolerance: float = 1e-8
    tie_tolerance: float = 1e-9
    tie_separation: float = 1e-4


@dataclass(frozen=True)
class OracleSettings:
    grid: int = 801
    gap_tolerance: float = 1e-3
    refine: bool = True


@dataclass(frozen=True)
class RunSettings:
    seed: int = 0
    concavity_samples: int = 50


@dataclass(frozen=True)
class Settings:
    tolerances: Tolerances = field(default_factory=Tolerances)
    tracing: TracingSettings = field(default_factory=TracingSettings)
    kkt: KKTSettings = field(default_factory=KKTSettings)
    invexity: InvexitySettings = field(default_factory=InvexitySettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    run: RunSettings = field(default_factory=RunSettings)


DEFAULT_SETTINGS = Settings()


def get_config(config_path: str | Path) -> dict:
    with open(config_path, "rb") as f:
        config = tomllib.load(f)
    return config


def _apply_section(section: Any, values: dict, section_name: str) -> Any:
    known = {f.name: f for f in fields(section)}
    updates = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigurationError(f"unknown setting {section_name}.{key}", f"{section_name}.{key}")
        current = getattr(section, key)
        if isinstance(current, tuple):
            value = tuple(float(v) for v in value)
        elif isinstance(current, bool):
            value = bool(value)
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        updates[key] = value
    return replace(section, **updates)


def settings_from_dict(config: dict) -> Settings:
    """Map a parsed config.toml document onto Settings, keeping defaults for missing keys."""
    settings = DEFAULT_SETTINGS
    for name, values in config.items():
        if not hasattr(settings, name) or not isinstance(values, dict):
            raise ConfigurationError(f"unknown settings section [{name}]", name)
        section = _apply_section(getattr(settings, name), values, name)
        settings = replace(settings, **{name: section})
    return settings


def load_settings(config_path: str | Path | None = None) -> Settings:
    if config_path is None:
        return DEFAULT_SETTINGS
    logger.debug(f"Loading settings from {config_path}")
    return settings_from_dict(get_config(config_path))


def resolve(settings: Settings | None) -> Settings:
    return DEFAULT_SETTINGS if settings is None else settings
