"""Schemas for statistic descriptors and quadrature settings."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class QuadratureSpec(BaseModel):
    """Adaptive Gauss-Kronrod settings for the integrated likelihoods.

    ``atan`` maps the real line onto (-pi/2, pi/2); ``log-atan`` does the same
    after ν = e^u, which turns ν^(n-1) dν into e^(n u) du; ``identity`` needs
    finite bounds.
    """

    model_config = ConfigDict(frozen=True)

    scheme: Literal["gk21", "gk15"] = "gk21"
    abs_tol: float = Field(default=1e-14, gt=0)
    rel_tol: float = Field(default=1e-11, gt=0)
    transform: Literal["identity", "atan", "log-atan"] = "atan"
    max_subdivisions: int = Field(default=400, ge=10)


class StatisticDescriptor(BaseModel):
    kind: str
    identifier: str
    null: Optional[str] = None
    alternatives: list[str] = Field(default_factory=list)
    weights: Optional[list[float]] = None
    f_base: Optional[str] = None
    g_base: Optional[str] = None
