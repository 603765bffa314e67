from __future__ import annotations

from pydantic import BaseModel, Field


class PermutationRecord(BaseModel):
    """Induced permutation of one group element; indices are 1-based for reports."""

    element: int
    label: str
    mapping: list[int]


class RegionViolation(BaseModel):
    point: list[float]
    element: int


class RegionCheckReport(BaseModel):
    group: str
    probes: int
    violation_count: int = 0
    violations: list[RegionViolation] = Field(default_factory=list)

    @property
    def invariant(self) -> bool:
        return self.violation_count == 0
