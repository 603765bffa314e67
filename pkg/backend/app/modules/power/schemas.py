"""Records emitted by calibration, power estimation, duels and the exact oracles."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..statistics.schemas import StatisticDescriptor

Verdict = Literal["a_dominates", "b_dominates", "tie_within_noise"]


class PowerEstimate(BaseModel):
    test: str
    alternative: str
    p_hat: float = Field(ge=0.0, le=1.0)
    std_error: float = Field(ge=0.0)
    N: int = Field(ge=1)
    seed: str
    failures: int = 0

    @model_validator(mode="after")
    def _check_std_error(self) -> "PowerEstimate":
        expected = (self.p_hat * (1.0 - self.p_hat) / self.N) ** 0.5
        if abs(self.std_error - expected) > 1e-12:
            raise ValueError(f"std_error must equal sqrt(p(1-p)/N) = {expected}")
        return self


class CalibrationSummary(BaseModel):
    statistic: StatisticDescriptor
    alpha: float
    critical_value: float
    replicates: int
    seed: str
    attained_size: float
    failure_rate: float = 0.0


class AlternativeDuel(BaseModel):
    alternative: str
    power_a: PowerEstimate
    power_b: PowerEstimate
    difference: float
    paired_se: float
    verdict: Verdict


class SizeCheck(BaseModel):
    test: str
    rate: float
    attained_size: float
    combined_se: float
    N: int
    seed: str
    within_3se: bool


class DuelReport(BaseModel):
    test_a: CalibrationSummary
    test_b: CalibrationSummary
    alternatives: list[AlternativeDuel]
    size_checks: list[SizeCheck] = Field(default_factory=list)

    def verdict_for(self, alternative: str) -> Verdict:
        for row in self.alternatives:
            if row.alternative == alternative:
                return row.verdict
        raise KeyError(alternative)


class SymmetricGap(BaseModel):
    test: str
    power_p1: float
    power_p2: float
    difference: float
    paired_se: float
    N: int
    seed: str
    within_3se: bool


class Region(BaseModel):
    """Finite union of open intervals in (0, 1)."""

    intervals: list[tuple[float, float]]

    def contains(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.intervals)

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


class AnalyticRegions(BaseModel):
    shape: str
    curvature: str
    alpha: float
    max_lr: Region
    avg_lr: Region


class RegionResult(BaseModel):
    cells: list[int]
    blocks: list[int] = Field(default_factory=list)
    power: float
    null_mass: float
    enumerated: bool = True
    maximizer_count: Optional[int] = None
    avg_lr_cells: list[int] = Field(default_factory=list)
    avg_lr_certified: Optional[bool] = None


class PowerRange(BaseModel):
    alpha: float
    regions: int
    min_power: float
    min_blocks: list[int]
    max_power: float
    max_blocks: list[int]
