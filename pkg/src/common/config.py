"""
Configuration management for the shock-capturing framework

`Config` reads a YAML file (plus .env), the pydantic settings models below
turn its sections into validated objects for the solver, trainer and
data generator.
"""
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.common.exceptions import ConfigurationError
from src.common.models import FluxKind, IndicatorKind, NodeFamily

DEFAULT_CONFIG_FILE = Path(__file__).resolve().parents[2] / "config" / "local.yaml"

# Switching thresholds, tuned jointly on the Riemann and double Mach cases
DEFAULT_THRESHOLDS: Dict[IndicatorKind, Tuple[float, float]] = {
    IndicatorKind.MODAL: (-4.5, -4.7),
    IndicatorKind.JUMP: (0.012, 0.01),
    IndicatorKind.ANNSI: (0.5, 0.5),
    IndicatorKind.NONE: (float("inf"), float("-inf")),
}


class Config:
    """Configuration manager"""

    def __init__(self, config_file: Optional[str] = None, env_file: Optional[str] = None):
        """
        Initialize configuration

        Args:
            config_file: Path to YAML configuration file
            env_file: Path to .env file
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        self._config: Dict[str, Any] = {}
        if config_file:
            self._load_yaml(config_file)

    def _load_yaml(self, config_file: str) -> None:
        """Load configuration from YAML file"""
        try:
            with open(config_file, 'r') as f:
                self._config = yaml.safe_load(f) or {}
        except FileNotFoundError:
            raise ConfigurationError(f"Config file not found: {config_file}")
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Error parsing YAML: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value

        Supports dot notation for nested values (e.g., 'solver.cfl').
        Environment variables take precedence (SOLVER_CFL).
        """
        env_key = key.upper().replace('.', '_')
        env_value = os.getenv(env_key)
        if env_value is not None:
            return env_value

        value: Any = self._config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def get_float(self, key: str, default: float = 0.0) -> float:
        """Get float configuration value"""
        value = self.get(key, default)
        try:
            return float(value)
        except (ValueError, TypeError):
            return default

    def section(self, key: str) -> Dict[str, Any]:
        """Get a nested section as a dictionary (empty if missing)"""
        value = self.get(key, {})
        return dict(value) if isinstance(value, dict) else {}


_global_config: Optional[Config] = None


def init_config(config_file: Optional[str] = None, env_file: Optional[str] = None) -> Config:
    """
    Initialize global configuration

    Falls back to config/local.yaml when no file is given and it exists.
    """
    global _global_config
    if config_file is None and DEFAULT_CONFIG_FILE.exists():
        config_file = str(DEFAULT_CONFIG_FILE)
    _global_config = Config(config_file, env_file)
    return _global_config


def get_config() -> Config:
    """Get global configuration instance (auto-initialized with defaults)"""
    if _global_config is None:
        return init_config()
    return _global_config


# ============================================================
# Validated settings
# ============================================================

class IndicatorConfig(BaseModel):
    """Troubled-cell indicator settings"""
    kind: IndicatorKind = IndicatorKind.ANNSI
    variable: str = "density"
    upper: Optional[float] = None
    lower: Optional[float] = None
    pixel_threshold: float = Field(0.5, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _fill_thresholds(self) -> "IndicatorConfig":
        default_upper, default_lower = DEFAULT_THRESHOLDS[self.kind]
        if self.upper is None:
            self.upper = default_upper
        if self.lower is None:
            self.lower = default_lower
        if self.lower > self.upper:
            raise ValueError(
                f"lower threshold {self.lower} exceeds upper threshold {self.upper}"
            )
        if self.variable not in ("density", "pressure"):
            raise ValueError(f"Unsupported indicator variable: {self.variable}")
        return self


class TrainConfig(BaseModel):
    """Network training settings"""
    batch_size: int = Field(500, ge=2)
    epochs: int = Field(120, ge=1)
    learning_rate: float = Field(0.01, gt=0.0)
    lr_decay_every: int = Field(15, ge=1)
    lr_decay_factor: float = Field(0.5, gt=0.0, le=1.0)
    lam: float = 1.1
    loss_convention: str = "direct"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    pixel_threshold: float = Field(0.5, gt=0.0, lt=1.0)
    seed: int = 0
    precision: str = "float32"

    @model_validator(mode="after")
    def _check_choices(self) -> "TrainConfig":
        if self.loss_convention not in ("direct", "rcf"):
            raise ValueError(f"loss_convention must be 'direct' or 'rcf', got {self.loss_convention}")
        if self.precision not in ("float32", "float64"):
            raise ValueError(f"precision must be 'float32' or 'float64', got {self.precision}")
        return self

    def learning_rate_at(self, epoch: int) -> float:
        """Learning rate for a 1-based epoch number"""
        return self.learning_rate * self.lr_decay_factor ** ((epoch - 1) // self.lr_decay_every)


class DataGenConfig(BaseModel):
    """Synthetic training-data settings"""
    degree: int = Field(5, ge=3)
    node_family: NodeFamily = NodeFamily.GAUSS
    table: str = "annsi"
    scale: float = 1.0
    seed: int = 0
    epsilon: float = 0.1
    validation: bool = True
    draw_limit_factor: int = Field(200, ge=1)

    @model_validator(mode="after")
    def _check_scale(self) -> "DataGenConfig":
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.table not in ("annsi", "annsl"):
            raise ValueError(f"table must be 'annsi' or 'annsl', got {self.table}")
        return self


class RunConfig(BaseModel):
    """Simulation run settings"""
    case: str = "riemann4"
    case_options: Dict[str, Any] = Field(default_factory=dict)
    degree: int = Field(5, ge=1)
    mesh: Optional[Tuple[int, int]] = None
    mesh_refinement: Tuple[int, int] = (1, 1)
    flux: Optional[FluxKind] = None
    entropy_fix: bool = True
    entropy_fix_delta: float = 0.05
    indicator: IndicatorConfig = Field(default_factory=IndicatorConfig)
    annsi_checkpoint: Optional[str] = None
    annsl_checkpoint: Optional[str] = None
    annsl_all_elements: bool = False
    cfl: float = Field(0.9, gt=0.0)
    t_end: Optional[float] = None
    output_interval: Optional[float] = None
    output_dir: str = "./output"
    output_formats: List[str] = Field(default_factory=lambda: ["csv"])
    max_steps: Optional[int] = None
    seed: int = 0
    threads: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_checkpoints(self) -> "RunConfig":
        if self.indicator.kind == IndicatorKind.ANNSI and not self.annsi_checkpoint:
            raise ValueError("indicator 'annsi' requires annsi_checkpoint")
        unknown = set(self.output_formats) - {"csv", "vtk", "parquet"}
        if unknown:
            raise ValueError(f"Unknown snapshot formats: {sorted(unknown)}")
        return self


def _build(model: type, data: Dict[str, Any], what: str):
    try:
        return model(**data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid {what} configuration: {e}") from e


def load_indicator_config(config: Optional[Config] = None, **overrides: Any) -> IndicatorConfig:
    """
    Build an IndicatorConfig from the 'indicator' section

    Thresholds missing from the overrides come from 'indicator.thresholds.<kind>',
    then from the built-in defaults of the kind.
    """
    config = config or get_config()
    indicator = config.section("indicator")
    thresholds = indicator.pop("thresholds", {}) or {}
    indicator.update({k: v for k, v in overrides.items() if v is not None})
    kind = indicator.get("kind", IndicatorKind.ANNSI.value)
    kind = kind.value if isinstance(kind, IndicatorKind) else str(kind)
    for bound in ("upper", "lower"):
        if indicator.get(bound) is None and kind in thresholds:
            indicator[bound] = thresholds[kind].get(bound)
    return _build(IndicatorConfig, indicator, "indicator")


def load_run_config(config: Optional[Config] = None, **overrides: Any) -> RunConfig:
    """
    Build a RunConfig from the 'solver', 'indicator', 'run' and 'storage' sections

    Keyword overrides (e.g. from CLI flags) win over file values; None is ignored.
    """
    config = config or get_config()
    data: Dict[str, Any] = {}
    data.update(config.section("solver"))
    data.update(config.section("run"))
    data["indicator"] = load_indicator_config(config, **(overrides.pop("indicator", None) or {}))

    if "output_dir" not in data:
        output_path = config.get("storage.output_path")
        if output_path:
            data["output_dir"] = output_path
    formats = config.get("storage.snapshot_formats")
    if formats and "output_formats" not in data:
        data["output_formats"] = formats

    data.update({k: v for k, v in overrides.items() if v is not None})
    return _build(RunConfig, data, "run")


def load_train_config(config: Optional[Config] = None, **overrides: Any) -> TrainConfig:
    """Build a TrainConfig from the 'training' section plus overrides"""
    config = config or get_config()
    data = config.section("training")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return _build(TrainConfig, data, "training")


def load_datagen_config(config: Optional[Config] = None, **overrides: Any) -> DataGenConfig:
    """Build a DataGenConfig from the 'datagen' section plus overrides"""
    config = config or get_config()
    data = config.section("datagen")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return _build(DataGenConfig, data, "data generation")
