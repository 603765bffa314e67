"""Schemas for density verification results."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ShapeCheck(BaseModel):
    name: str
    integral: float
    abs_error: float
    normalized: bool
    monotone_ok: bool
    curvature_ok: bool
    min_second_difference: float
    max_second_difference: float

    @property
    def passed(self) -> bool:
        return self.normalized and self.monotone_ok and self.curvature_ok


class DensityVerification(BaseModel):
    density: str
    dimension: int = Field(ge=1)
    bounds: list[tuple[float, float]]
    truncated: bool = False
    integral: float
    abs_error: float
    tolerance: float
    passed: bool
    status: Literal["ok", "failed", "quadrature_failed"]
    ks_statistic: Optional[float] = None
    ks_draws: int = 0
    message: Optional[str] = None
