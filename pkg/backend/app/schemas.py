"""Pydantic models for command output and error payloads."""

from typing import Optional

from pydantic import BaseModel, Field


class MessageResponse(BaseModel):
    message: str


class ErrorResponse(BaseModel):
    """Printed as one JSON line on stderr when a command fails."""

    error: str
    detail: str
    exit_code: int
    messages: list[str] = Field(default_factory=list)
    failed: list[str] = Field(default_factory=list)
    estimate: Optional[float] = None
    error_bound: Optional[float] = None
    best_iterate: Optional[float] = None
    gradient: Optional[float] = None
