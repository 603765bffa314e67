"""Experiment configuration, criteria and run manifests."""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..densities.registry import BIVARIATE, LOCATION_BASES, SCALE_BASES, SHAPES
from ..statistics.service import StatisticKind

ProblemKind = Literal["symmetric-pair", "quad-bivariate", "location", "scale", "alternatives"]

PAIR_KINDS = {StatisticKind.MAX_LR.value, StatisticKind.AVG_LR.value}
LOCATION_KINDS = {StatisticKind.INT_LOCATION_LR.value, StatisticKind.MAX_LOCATION_LR.value}
SCALE_KINDS = {StatisticKind.INT_SCALE_LR.value, StatisticKind.MAX_SCALE_LR.value}


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    abs_tol: Optional[float] = Field(default=None, gt=0)
    rel_tol: Optional[float] = Field(default=None, gt=0)
    max_subdivisions: Optional[int] = Field(default=None, ge=10)


class ExperimentConfig(BaseModel):
    """Either a bundled ``scenario`` or an explicit problem; any set field overrides the defaults."""

    model_config = ConfigDict(extra="forbid")

    scenario: Optional[str] = None
    problem: Optional[ProblemKind] = None
    shape: Optional[str] = None
    bivariate: Optional[str] = None
    n: int = Field(default=1, ge=1)
    null: Optional[str] = None
    alternatives: list[str] = Field(default_factory=list)
    statistics: list[str] = Field(default_factory=lambda: ["avg-lr", "max-lr"])
    weights: Optional[list[float]] = None
    alpha: Optional[float] = None
    n_calib: Optional[int] = Field(default=None, ge=1000)
    n_power: Optional[int] = Field(default=None, ge=1000)
    seed: Optional[int] = None
    quadrature: Optional[QuadratureConfig] = None
    output_dir: Optional[Path] = None
    f_shape: str = "convex-3x2"
    g_shape: Optional[str] = None

    @field_validator("alpha")
    @classmethod
    def _alpha_in_unit_interval(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 < value < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        return value

    @field_validator("seed")
    @classmethod
    def _seed_is_u64(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not 0 <= value < 2**64:
            raise ValueError("seed must be an unsigned 64-bit value")
        return value

    @field_validator("statistics")
    @classmethod
    def _known_statistics(cls, value: list[str]) -> list[str]:
        valid = {kind.value for kind in StatisticKind}
        unknown = [item for item in value if item not in valid]
        if unknown:
            raise ValueError(f"unknown statistic ids {unknown}; valid ids: {sorted(valid)}")
        if not value:
            raise ValueError("at least one statistic is required")
        return value

    @field_validator("shape", "f_shape", "g_shape")
    @classmethod
    def _known_shape(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in SHAPES and value != "reflect":
            raise ValueError(f"unknown shape '{value}'; valid ids: {sorted(SHAPES)}")
        return value

    @field_validator("bivariate")
    @classmethod
    def _known_bivariate(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in BIVARIATE:
            raise ValueError(f"unknown bivariate family '{value}'; valid ids: {sorted(BIVARIATE)}")
        return value

    @model_validator(mode="after")
    def _check_problem(self) -> "ExperimentConfig":
        if self.problem is None:
            return self
        kinds = set(self.statistics)
        if self.problem == "symmetric-pair":
            if self.shape is None or self.shape == "reflect":
                raise ValueError("a symmetric-pair problem needs a shape id")
        if self.problem in ("symmetric-pair", "quad-bivariate", "alternatives") and not kinds <= PAIR_KINDS:
            raise ValueError(f"{self.problem} problems take statistics {sorted(PAIR_KINDS)}")
        if self.problem == "quad-bivariate" and self.n != 2:
            self.n = 2
        if self.problem == "alternatives":
            unknown = [item for item in self.alternatives if item not in SHAPES]
            if not self.alternatives or unknown:
                raise ValueError(f"alternatives must be shape ids from {sorted(SHAPES)}")
        if self.problem in ("location", "scale"):
            bases = LOCATION_BASES if self.problem == "location" else SCALE_BASES
            allowed = LOCATION_KINDS if self.problem == "location" else SCALE_KINDS
            if self.null not in bases or len(self.alternatives) != 1 or self.alternatives[0] not in bases:
                raise ValueError(f"{self.problem} problems need one null and one alternative id from {sorted(bases)}")
            if not kinds <= allowed:
                raise ValueError(f"{self.problem} problems take statistics {sorted(allowed)}")
        if self.weights is not None and "avg-lr" not in kinds:
            raise ValueError("weights apply to the avg-lr statistic only")
        return self


class Criterion(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


class ScenarioSummary(BaseModel):
    scenario: str
    passed: bool
    criteria: list[Criterion]


class RunManifest(BaseModel):
    """The only output allowed to differ between identical runs (timestamp and duration)."""

    command: str
    scenario: Optional[str] = None
    config_hash: str
    version: str
    timestamp: str
    master_seed: int
    substreams: dict[str, list[int]] = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
    duration_seconds: float = 0.0
