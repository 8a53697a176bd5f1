"""
Configuration models
Date of Creation: 2026-10-17
Description: Pydantic models for the radio constants, the simulation knobs,
             Monte Carlo sweeps and the command line, plus JSON loading and
             logging setup. Every default is declared here.
"""

import logging
import os
from enum import Enum
from pathlib import Path
from typing import List, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, \
    model_validator

from ..classes.mailer import DelayKind, DelayPolicy, ReadPolicy
from ..errors import ConfigError

OUTPUT_DIR_ENV = "COGNITIVEQOS_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "data/output"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

Model = TypeVar("Model", bound=BaseModel)


class Mode(str, Enum):
    CDMA_EQUAL = "cdma-eq"
    CDMA_UNEQUAL = "cdma-uneq"
    STDMA = "stdma"


class RadioParams(BaseModel):
    """
    Radio and scenario-generation constants. Powers are in mW, distances in
    m and rates in bit/s.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    noise_floor_mw: float = Field(1e-6, gt=0)
    spreading_gain: float = Field(128.0, gt=0)
    area_side_m: float = Field(1000.0, gt=0)
    pair_distance_min_m: float = Field(10.0, gt=0)
    pair_distance_max_m: float = Field(100.0, gt=0)
    min_distance_m: float = Field(1.0, gt=0)
    power_budget_mw: float = Field(100.0, gt=0)
    power_step_mw: float = Field(2.0, gt=0)
    pu_cap_mw: float = Field(1e-9, gt=0)
    pu_cap_spread: float = Field(0.5, ge=0, lt=1)
    sinr_threshold_min: float = Field(5e-5, gt=0)
    sinr_threshold_max: float = Field(5e-4, gt=0)
    pu_tx_power_mw: float = Field(10.0, ge=0)
    demand_min: int = Field(1, ge=1)
    demand_max: int = Field(3, ge=1)
    frame_slots: int = Field(20, ge=1)
    rate_min_bps: int = Field(64_000, gt=0)
    rate_max_bps: int = Field(256_000, gt=0)
    rate_step_bps: int = Field(32_000, gt=0)
    interference_range_ratio: float = Field(0.0, ge=0)
    resample_budget: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "RadioParams":
        if self.pair_distance_min_m > self.pair_distance_max_m:
            raise ValueError("pair_distance_min_m exceeds pair_distance_max_m")  # noqa
        if self.power_step_mw > self.power_budget_mw:
            raise ValueError("power_step_mw exceeds power_budget_mw")
        if self.sinr_threshold_min > self.sinr_threshold_max:
            raise ValueError("sinr_threshold_min exceeds sinr_threshold_max")  # noqa
        if self.demand_min > self.demand_max:
            raise ValueError("demand_min exceeds demand_max")
        if self.rate_min_bps > self.rate_max_bps:
            raise ValueError("rate_min_bps exceeds rate_max_bps")
        return self


class SimulationParams(BaseModel):
    """
    Mailer and solver knobs.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    delay: DelayKind = DelayKind.UNIFORM
    delay_max: int = Field(0, ge=0)
    read_policy: ReadPolicy = ReadPolicy.ALL
    max_cycles: int = Field(20_000, ge=1)
    learn_nogoods: bool = True
    frames: int = Field(3, ge=1)

    def delay_policy(self) -> DelayPolicy:
        return DelayPolicy.from_max(self.delay, self.delay_max)


class SweepConfig(BaseModel):
    """
    A Monte Carlo grid: every combination of n_cr, threshold, step and
    delay bound is run runs_per_point times.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    runs_per_point: int = Field(10, ge=1)
    base_seed: int = Field(0, ge=0)
    n_cr: List[int] = Field(default_factory=lambda: [7, 10, 15, 20])
    n_pu: int = Field(2, ge=0)
    thresholds_mw: List[float] = Field(
        default_factory=lambda: [2e-10, 5e-10, 1e-9, 2e-9, 5e-9])
    steps_mw: List[float] = Field(default_factory=lambda: [2.0])
    delays: List[int] = Field(default_factory=lambda: [0])
    mode: Mode = Mode.CDMA_EQUAL
    workers: int = Field(1, ge=1)
    radio: RadioParams = Field(default_factory=RadioParams)
    simulation: SimulationParams = Field(default_factory=SimulationParams)

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepConfig":
        for name in ("n_cr", "thresholds_mw", "steps_mw", "delays"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if min(self.n_cr) < 1:
            raise ValueError("n_cr values must be at least 1")
        if min(self.thresholds_mw) <= 0 or min(self.steps_mw) <= 0:
            raise ValueError("thresholds_mw and steps_mw must be positive")
        if min(self.delays) < 0:
            raise ValueError("delays must be non-negative")
        return self


class CliConfig(BaseModel):
    """
    Contents of a --config file. Command line flags override these values.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(0, ge=0)
    n_cr: int = Field(7, ge=1)
    n_pu: int = Field(2, ge=0)
    mode: Mode = Mode.CDMA_EQUAL
    output_dir: Optional[str] = None
    radio: RadioParams = Field(default_factory=RadioParams)
    simulation: SimulationParams = Field(default_factory=SimulationParams)
    sweep: SweepConfig = Field(default_factory=SweepConfig)


def describe_validation_error(error: ValidationError) -> str:
    """
    Formats a pydantic error as 'field.path: message' lines.
    """
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def parse_model(model: Type[Model], text: str, source: str) -> Model:
    """
    Validates JSON text against a model.

    Raises:
    - ConfigError: If validation fails; the message names the field path.
    """
    try:
        return model.model_validate_json(text)
    except ValidationError as error:
        raise ConfigError(
            f"{source}: {describe_validation_error(error)}") from error


def load_model(model: Type[Model], path: os.PathLike) -> Model:
    """
    Loads and validates a JSON file.

    Parameters:
    - model (Type[Model]): The pydantic model to validate against.
    - path (os.PathLike): The JSON file.

    Returns:
    - Model: The validated model.

    Raises:
    - OSError: If the file cannot be read; the message names the path.
    - ConfigError: If validation fails.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise OSError(f"Cannot read {path}: {error.strerror or error}") \
            from error
    return parse_model(model, text, str(path))


def load_config(path: Optional[os.PathLike]) -> CliConfig:
    if path is None:
        return CliConfig()
    return load_model(CliConfig, path)


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def configure_logging(verbosity: int = 0) -> None:
    """
    Configures the root logger once: WARNING by default, INFO for -v and
    DEBUG for -vv.
    """
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
