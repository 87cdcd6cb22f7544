"""
Configuration management for jugglespec.

Defaults live on the models below. A YAML file can override any of them,
a handful of run-environment settings come from environment variables
(optionally through a .env file), and explicit overrides win last.
"""

import hashlib
import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from jugglespec.errors import ConfigurationError

# Load environment variables from .env file if it exists
load_dotenv()

RIGHT_HAND = 0
LEFT_HAND = 1
HAND_NAMES = {RIGHT_HAND: "right", LEFT_HAND: "left"}

ABLATIONS = ("none", "rollout", "premature", "baseline")

Vec3 = Tuple[float, float, float]

_TRUTHY = ("1", "true", "yes", "on")


class TimingConfig(BaseModel):
    """Beat timing shared by both hands."""

    cycle_time: float = 0.48
    dwell_ratio: float = 0.5

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("cycle_time")
    @classmethod
    def _positive_cycle(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("cycle_time must be positive")
        return value

    @field_validator("dwell_ratio")
    @classmethod
    def _dwell_in_range(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("dwell_ratio must lie strictly between 0 and 1")
        return value

    @property
    def beat_time(self) -> float:
        return self.cycle_time / 2

    @property
    def dwell_time(self) -> float:
        return self.dwell_ratio * self.cycle_time

    @property
    def vacant_time(self) -> float:
        return (1 - self.dwell_ratio) * self.cycle_time


class HandGeometryConfig(BaseModel):
    """Desired takeoff and touchdown points per hand, plus gravity.

    The left hand mirrors the right hand across the x = 0 plane unless its
    points are given explicitly.
    """

    right_takeoff: Vec3 = (0.35, 0.0, 0.0)
    right_touchdown: Vec3 = (0.45, 0.0, 0.0)
    left_takeoff: Optional[Vec3] = None
    left_touchdown: Optional[Vec3] = None
    gravity: Vec3 = (0.0, 0.0, -9.81)

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _finite(self) -> "HandGeometryConfig":
        for name in ("right_takeoff", "right_touchdown", "left_takeoff", "left_touchdown", "gravity"):
            value = getattr(self, name)
            if value is not None and not all(math.isfinite(c) for c in value):
                raise ValueError(f"{name} must be finite")
        if not self.gravity[2] < 0:
            raise ValueError("gravity must point down (negative z)")
        return self

    @staticmethod
    def _mirror(point: Vec3) -> Vec3:
        return (-point[0], point[1], point[2])

    def takeoff(self, hand: int) -> np.ndarray:
        if hand == RIGHT_HAND:
            return np.array(self.right_takeoff, dtype=float)
        point = self.left_takeoff if self.left_takeoff is not None else self._mirror(self.right_takeoff)
        return np.array(point, dtype=float)

    def touchdown(self, hand: int) -> np.ndarray:
        if hand == RIGHT_HAND:
            return np.array(self.right_touchdown, dtype=float)
        point = self.left_touchdown if self.left_touchdown is not None else self._mirror(self.right_touchdown)
        return np.array(point, dtype=float)

    @property
    def g(self) -> np.ndarray:
        return np.array(self.gravity, dtype=float)

    @property
    def catch_height(self) -> float:
        return float(self.right_touchdown[2])


class OptimizerConfig(BaseModel):
    """Discretisation, constraint windows and constraint switches of one cycle."""

    n_steps: int = 24
    post_takeoff_window: float = 0.04
    pre_touchdown_window: float = 0.04
    exact_pre_touchdown: bool = False
    slope_angle_deg: float = 20.0
    margin: float = 1e-4
    premature_contact_peak: float = 0.15
    vertical_final: float = 0.05
    horizontal_final: float = 0.15
    schedule_inactive_bound: float = 1.0
    normal_blend_steps: int = 2
    throw_blend_steps: int = 4
    empty_cycle_homing: bool = True
    premature_contact: bool = True
    three_throw_scheduling: bool = True
    rollout: bool = True

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("n_steps")
    @classmethod
    def _enough_steps(cls, value: int) -> int:
        if value < 4:
            raise ValueError("n_steps must be at least 4")
        return value

    @field_validator("post_takeoff_window", "pre_touchdown_window")
    @classmethod
    def _positive_window(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("constraint windows must be positive")
        return value

    @field_validator("slope_angle_deg")
    @classmethod
    def _slope_range(cls, value: float) -> float:
        if not 0 < value < 90:
            raise ValueError("slope_angle_deg must lie in (0, 90)")
        return value

    @field_validator("premature_contact_peak", "vertical_final", "horizontal_final", "schedule_inactive_bound")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("distance schedules must be non-negative")
        return value

    @property
    def slope_angle(self) -> float:
        return math.radians(self.slope_angle_deg)

    def with_ablation(self, ablation: str) -> "OptimizerConfig":
        """Return a copy with the constraints named by ``ablation`` switched off.

        Args:
            ablation: One of ``none``, ``rollout``, ``premature`` or ``baseline``

        Returns:
            OptimizerConfig: Adjusted copy

        Raises:
            ConfigurationError: If the ablation name is unknown
        """
        if ablation not in ABLATIONS:
            raise ConfigurationError(f"Unknown ablation '{ablation}', expected one of {', '.join(ABLATIONS)}")
        update: Dict[str, bool] = {}
        if ablation in ("rollout", "baseline"):
            update["rollout"] = False
        if ablation in ("premature", "baseline"):
            update["premature_contact"] = False
            update["three_throw_scheduling"] = False
        return self.model_copy(update=update)


class SolverConfig(BaseModel):
    """Limits and tolerances of the augmented-Lagrangian solver."""

    max_outer_iterations: int = 200
    max_inner_iterations: int = 400
    penalty_initial: float = 10.0
    penalty_growth: float = 10.0
    penalty_max: float = 1e8
    equality_tolerance: float = 1e-6
    inequality_tolerance: float = 1e-6
    stall_iterations: int = 8
    warm_start: bool = True

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _sane(self) -> "SolverConfig":
        if self.max_outer_iterations < 1 or self.max_inner_iterations < 1:
            raise ValueError("iteration limits must be positive")
        if not (0 < self.penalty_initial <= self.penalty_max) or self.penalty_growth <= 1:
            raise ValueError("penalty must start positive, grow by more than 1 and stay below its cap")
        if self.equality_tolerance <= 0 or self.inequality_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        return self


class ContactConfig(BaseModel):
    """Simulator physics and event detection thresholds."""

    stiffness: float = 1e5
    damping: float = 1e3
    friction: float = 0.5
    friction_damping: float = 1e3
    time_step: float = 2e-4
    ball_radius: float = 0.0375
    ball_mass: float = 0.1
    mouth_radius: float = 0.05
    slope_angle_deg: float = 20.0
    catch_speed: float = 0.2
    catch_axis_fraction: float = 0.7
    drop_margin: float = 0.3
    trace_decimation: int = 50

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _stable(self) -> "ContactConfig":
        if self.stiffness <= 0 or self.damping <= 0:
            raise ValueError("stiffness and damping must be positive")
        if self.friction < 0 or self.friction_damping < 0:
            raise ValueError("friction parameters must be non-negative")
        if not 0 < self.time_step <= 1e-3:
            raise ValueError("time_step must lie in (0, 1e-3] s")
        if self.time_step >= 2 * math.sqrt(self.ball_mass / self.stiffness):
            raise ValueError("time_step too large for the contact stiffness (h < 2*sqrt(m/k))")
        if not 0 < self.ball_radius < self.mouth_radius:
            raise ValueError("ball_radius must be positive and smaller than mouth_radius")
        if not 0 < self.slope_angle_deg < 90:
            raise ValueError("slope_angle_deg must lie in (0, 90)")
        if self.trace_decimation < 1:
            raise ValueError("trace_decimation must be at least 1")
        return self

    @property
    def slope_angle(self) -> float:
        return math.radians(self.slope_angle_deg)

    def stiffened(self, factor: float = 10.0) -> "ContactConfig":
        """Stiffer, frictionless contacts used by the accuracy study."""
        return self.model_copy(update={
            "stiffness": self.stiffness * factor,
            "damping": self.damping * factor,
            "friction": 0.0,
            "friction_damping": 0.0,
        })


class ExperimentConfig(BaseModel):
    """Experiment sizes, worker pool, outputs and cycle cache."""

    catches: int = 100
    seeds: List[int] = Field(default_factory=lambda: list(range(20)))
    walk_steps: int = 20000
    walk_balls: int = 5
    max_height: int = 9
    allow_one_throws: bool = False
    workers: int = 1
    output_directory: Path = Path("output")
    cache_enabled: bool = True
    cache_type: str = "memory"
    cache_ttl: int = 0
    cache_path: Optional[str] = None

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _sane(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if self.catches < 0 or self.walk_steps < 0:
            raise ValueError("catch targets and walk lengths must be non-negative")
        if not 1 <= self.walk_balls <= self.max_height <= 9:
            raise ValueError("need 1 <= walk_balls <= max_height <= 9")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.cache_type not in ("memory", "disk"):
            raise ValueError(f"Unsupported cache type: {self.cache_type}")
        return self


class JuggleConfig(BaseModel):
    """Fully resolved configuration of one run."""

    timing: TimingConfig = Field(default_factory=TimingConfig)
    geometry: HandGeometryConfig = Field(default_factory=HandGeometryConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    contact: ContactConfig = Field(default_factory=ContactConfig)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)

    model_config = {"frozen": True, "extra": "forbid"}

    def fingerprint(self) -> str:
        """Hash of every setting that changes a solved cycle."""
        relevant = {
            "timing": self.timing.model_dump(mode="json"),
            "geometry": self.geometry.model_dump(mode="json"),
            "optimizer": self.optimizer.model_dump(mode="json"),
            "solver": self.solver.model_dump(mode="json"),
        }
        return hashlib.md5(json.dumps(relevant, sort_keys=True).encode()).hexdigest()

    def with_ablation(self, ablation: str) -> "JuggleConfig":
        return self.model_copy(update={"optimizer": self.optimizer.with_ablation(ablation)})


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_config_file(config_file: Path) -> Dict[str, Any]:
    if not config_file.exists():
        raise ConfigurationError(f"Config file not found: {config_file}")
    try:
        data = yaml.safe_load(config_file.read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Config file {config_file} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {config_file} must contain a mapping at top level")
    return data


def _environment_settings() -> Dict[str, Any]:
    experiment: Dict[str, Any] = {}
    workers = os.getenv("JUGGLESPEC_WORKERS")
    if workers:
        try:
            experiment["workers"] = int(workers)
        except ValueError as e:
            raise ConfigurationError(f"JUGGLESPEC_WORKERS must be an integer, got '{workers}'") from e
    output_directory = os.getenv("JUGGLESPEC_OUTPUT_DIRECTORY")
    if output_directory:
        experiment["output_directory"] = output_directory
    cache_enabled = os.getenv("JUGGLESPEC_CACHE_ENABLED")
    if cache_enabled is not None:
        experiment["cache_enabled"] = cache_enabled.lower() in _TRUTHY
    cache_type = os.getenv("JUGGLESPEC_CACHE_TYPE")
    if cache_type:
        experiment["cache_type"] = cache_type
    cache_path = os.getenv("JUGGLESPEC_CACHE_PATH")
    if cache_path:
        experiment["cache_path"] = cache_path
    return {"experiment": experiment} if experiment else {}


def load_config(
    config_file: Optional[Path] = None,
    workers_override: Optional[int] = None,
    output_directory_override: Optional[Path] = None,
    cache_enabled_override: Optional[bool] = None,
    cache_type_override: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> JuggleConfig:
    """
    Load configuration from defaults, a YAML file, the environment and overrides.

    Args:
        config_file: Optional YAML file with any subset of the configuration
        workers_override: Override for the worker thread count
        output_directory_override: Override for the output directory
        cache_enabled_override: Override for the cycle cache switch
        cache_type_override: Override for the cache type
        overrides: Nested mapping merged last, e.g. ``{"contact": {"friction": 0.0}}``

    Returns:
        JuggleConfig: Frozen configuration object

    Raises:
        ConfigurationError: If the file is unreadable or any value is invalid
    """
    data: Dict[str, Any] = {}
    if config_file is not None:
        data = _deep_merge(data, _read_config_file(Path(config_file)))
    data = _deep_merge(data, _environment_settings())

    experiment: Dict[str, Any] = {}
    if workers_override is not None:
        experiment["workers"] = workers_override
    if output_directory_override is not None:
        experiment["output_directory"] = output_directory_override
    if cache_enabled_override is not None:
        experiment["cache_enabled"] = cache_enabled_override
    if cache_type_override is not None:
        experiment["cache_type"] = cache_type_override
    if experiment:
        data = _deep_merge(data, {"experiment": experiment})
    if overrides:
        data = _deep_merge(data, overrides)

    try:
        return JuggleConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e
