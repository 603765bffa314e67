"""Error types shared by every module.

Each error carries a process exit code and a human-readable detail. Library
code only raises; the CLI entry point turns them into exit codes.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Any, Optional


class ExitCode(IntEnum):
    OK = 0
    CRITERION_FAILED = 1
    CONFIG_ERROR = 2


class LabError(Exception):
    exit_code: ExitCode = ExitCode.CRITERION_FAILED

    def __init__(self, detail: str, *, exit_code: Optional[ExitCode] = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def payload(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "detail": self.detail}


class ConfigError(LabError):
    exit_code = ExitCode.CONFIG_ERROR

    def __init__(self, detail: str, messages: Optional[list[str]] = None) -> None:
        super().__init__(detail)
        self.messages = list(messages or [])

    def payload(self) -> dict[str, Any]:
        data = super().payload()
        data["messages"] = self.messages
        return data


class DensityError(LabError):
    pass


class UnsupportedShapeError(LabError):
    pass


class QuadratureError(LabError):
    def __init__(self, detail: str, estimate: float, error_bound: float) -> None:
        super().__init__(detail)
        self.estimate = estimate
        self.error_bound = error_bound

    def payload(self) -> dict[str, Any]:
        data = super().payload()
        data.update(estimate=self.estimate, error_bound=self.error_bound)
        return data


class OptimizerError(LabError):
    def __init__(self, detail: str, best_iterate: float, gradient: float) -> None:
        super().__init__(detail)
        self.best_iterate = best_iterate
        self.gradient = gradient

    def payload(self) -> dict[str, Any]:
        data = super().payload()
        data.update(best_iterate=self.best_iterate, gradient=self.gradient)
        return data


class InvarianceError(LabError):
    def __init__(self, detail: str, element_index: int) -> None:
        super().__init__(detail)
        self.element_index = element_index


class CalibrationError(LabError):
    pass


class CriterionFailure(LabError):
    def __init__(self, detail: str, failed: Optional[list[str]] = None) -> None:
        super().__init__(detail, exit_code=ExitCode.CRITERION_FAILED)
        self.failed = list(failed or [])

    def payload(self) -> dict[str, Any]:
        data = super().payload()
        data["failed"] = self.failed
        return data
