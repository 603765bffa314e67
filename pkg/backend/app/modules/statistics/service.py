"""Likelihood-ratio statistics: maximum, weighted average, integrated and profile.

Every statistic is a log-domain quantity evaluated over a batch of points of
shape ``(N, n)``. Thresholding a log statistic is equivalent to thresholding
the ratio itself, so calibrated decisions are unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from ..common.errors import DensityError, OptimizerError, QuadratureError
from ..common.utils import as_batch, as_point
from ..densities.service import Density
from ..densities.shapes import Base1D
from .mle import ProfileFit, fit_location, fit_scale
from .quadrature import LogIntegral, integrate_log_batch
from .schemas import QuadratureSpec, StatisticDescriptor

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12


class StatisticKind(str, Enum):
    MAX_LR = "max-lr"
    AVG_LR = "avg-lr"
    INT_LOCATION_LR = "int-loc-lr"
    INT_SCALE_LR = "int-scale-lr"
    MAX_LOCATION_LR = "max-loc-lr"
    MAX_SCALE_LR = "max-scale-lr"

    @property
    def uses_families(self) -> bool:
        return self not in (StatisticKind.MAX_LR, StatisticKind.AVG_LR)


@dataclass(frozen=True)
class StatisticValues:
    """Statistic values plus per-row flags; failed rows hold NaN."""

    values: np.ndarray
    degenerate: np.ndarray
    failed: np.ndarray


@dataclass(frozen=True)
class TestStatistic:
    __test__ = False

    kind: StatisticKind
    null_density: Optional[Density] = None
    alternatives: tuple[Density, ...] = ()
    weights: Optional[tuple[float, ...]] = None
    f_base: Optional[Base1D] = None
    g_base: Optional[Base1D] = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind.uses_families:
            if self.f_base is None or self.g_base is None:
                raise DensityError(f"{self.kind.value} needs exactly one f-family and one g-family")
            if self.kind in (StatisticKind.INT_SCALE_LR, StatisticKind.MAX_SCALE_LR):
                for base in (self.f_base, self.g_base):
                    if base.support != "positive" and not base.symmetric:
                        raise DensityError(f"scale base {base.name} must be positive or symmetric about 0")
            return
        if self.null_density is None:
            raise DensityError(f"{self.kind.value} needs a simple null density")
        if not self.alternatives:
            raise DensityError("at least one alternative density is required")
        spaces = {alt.space for alt in self.alternatives} | {self.null_density.space}
        if len(spaces) != 1:
            raise DensityError("null and alternatives must share one sample space")
        if self.weights is not None:
            if self.kind is not StatisticKind.AVG_LR:
                raise DensityError("weights apply to the average LR statistic only")
            weights = np.asarray(self.weights, dtype=np.float64)
            if weights.shape != (len(self.alternatives),):
                raise DensityError("one weight per alternative is required")
            if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
                raise DensityError("weights must be nonnegative and sum to 1")

    @property
    def identifier(self) -> str:
        return self.label or self.kind.value

    @property
    def dimension(self) -> Optional[int]:
        return self.null_density.space.n if self.null_density is not None else None

    def resolved_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.full(len(self.alternatives), 1.0 / len(self.alternatives))
        return np.asarray(self.weights, dtype=np.float64)

    def describe(self) -> StatisticDescriptor:
        return StatisticDescriptor(
            kind=self.kind.value,
            identifier=self.identifier,
            null=self.null_density.name if self.null_density is not None else None,
            alternatives=[alt.name for alt in self.alternatives],
            weights=list(self.resolved_weights()) if self.kind is StatisticKind.AVG_LR else None,
            f_base=self.f_base.name if self.f_base is not None else None,
            g_base=self.g_base.name if self.g_base is not None else None,
        )

    def evaluate(self, points: np.ndarray) -> StatisticValues:
        return evaluate_batch(self, points)


def _log_ratio(log_num: np.ndarray, log_den: np.ndarray) -> StatisticValues:
    with np.errstate(invalid="ignore"):
        values = log_num - log_den
    degenerate = np.isneginf(log_num) & np.isneginf(log_den)
    values = np.where(degenerate, -np.inf, values)
    return StatisticValues(values=values, degenerate=degenerate, failed=np.zeros(values.shape, dtype=bool))


def _alternative_logs(stat: TestStatistic, points: np.ndarray) -> np.ndarray:
    return np.stack([alt.log_pdf(points) for alt in stat.alternatives])


def max_lr_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    logs = _alternative_logs(stat, points)
    return _log_ratio(logs.max(axis=0), stat.null_density.log_pdf(points))


def avg_lr_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    logs = _alternative_logs(stat, points)
    weights = stat.resolved_weights()
    with np.errstate(divide="ignore"):
        log_mix = logsumexp(logs, axis=0, b=weights[:, None])
    return _log_ratio(log_mix, stat.null_density.log_pdf(points))


def _location_integrand(base: Base1D):
    def log_integrand(points: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return base.log_pdf(points - theta[:, None]).sum(axis=1)

    return log_integrand


def _scale_integrand(base: Base1D):
    """ν = e^u turns ∫ ν^(n-1) ∏ base(ν x_i) dν into ∫ e^(n u) ∏ base(e^u x_i) du."""

    def log_integrand(points: np.ndarray, u: np.ndarray) -> np.ndarray:
        n = points.shape[1]
        return n * u + base.log_pdf(points * np.exp(u)[:, None]).sum(axis=1)

    return log_integrand


def location_integrals(points: np.ndarray, base: Base1D, quad: QuadratureSpec) -> LogIntegral:
    """log ∫ ∏ base(x_i - θ) dθ per row."""
    return integrate_log_batch(_location_integrand(base), points, np.median(points, axis=1), quad)


def scale_integrals(points: np.ndarray, base: Base1D, quad: QuadratureSpec) -> LogIntegral:
    """log ∫₀^∞ ν^(n-1) ∏ base(ν x_i) dν per row, centred at u = -log mean|x|."""
    with np.errstate(divide="ignore"):
        centers = -np.log(np.abs(points).mean(axis=1))
    centers = np.where(np.isfinite(centers), centers, 0.0)
    return integrate_log_batch(_scale_integrand(base), points, centers, quad)


def _integrated_ratio(num: LogIntegral, den: LogIntegral) -> StatisticValues:
    failed = num.failed | den.failed
    values = np.where(failed, np.nan, num.log_value - den.log_value)
    return StatisticValues(values=values, degenerate=np.zeros(values.shape, dtype=bool), failed=failed)


def integrated_location_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    num = location_integrals(points, stat.g_base, stat.quad)
    den = location_integrals(points, stat.f_base, stat.quad)
    return _integrated_ratio(num, den)


def _scale_support_rows(stat: TestStatistic, points: np.ndarray) -> np.ndarray:
    if stat.f_base.support == "positive" or stat.g_base.support == "positive":
        return np.all(points > 0, axis=1)
    return np.all(points != 0, axis=1)


def integrated_scale_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    quad = stat.quad.model_copy(update={"transform": "log-atan"})
    num = scale_integrals(points, stat.g_base, quad)
    den = scale_integrals(points, stat.f_base, quad)
    result = _integrated_ratio(num, den)
    outside = ~_scale_support_rows(stat, points)
    if outside.any():
        return StatisticValues(
            values=np.where(outside, np.nan, result.values),
            degenerate=result.degenerate,
            failed=result.failed | outside,
        )
    return result


def _profile_ratio(fit_g: ProfileFit, fit_f: ProfileFit) -> StatisticValues:
    failed = ~(fit_g.converged & fit_f.converged)
    values = np.where(failed, np.nan, fit_g.value - fit_f.value)
    return StatisticValues(values=values, degenerate=np.zeros(values.shape, dtype=bool), failed=failed)


def max_location_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    return _profile_ratio(fit_location(points, stat.g_base), fit_location(points, stat.f_base))


def max_scale_batch(stat: TestStatistic, points: np.ndarray) -> StatisticValues:
    outside = ~_scale_support_rows(stat, points)
    safe = np.where(outside[:, None], 1.0, points)
    result = _profile_ratio(fit_scale(safe, stat.g_base), fit_scale(safe, stat.f_base))
    return StatisticValues(
        values=np.where(outside, np.nan, result.values),
        degenerate=result.degenerate,
        failed=result.failed | outside,
    )


_EVALUATORS = {
    StatisticKind.MAX_LR: max_lr_batch,
    StatisticKind.AVG_LR: avg_lr_batch,
    StatisticKind.INT_LOCATION_LR: integrated_location_batch,
    StatisticKind.INT_SCALE_LR: integrated_scale_batch,
    StatisticKind.MAX_LOCATION_LR: max_location_batch,
    StatisticKind.MAX_SCALE_LR: max_scale_batch,
}


def evaluate_batch(stat: TestStatistic, points) -> StatisticValues:
    """Evaluate ``stat`` on every row; failures are flagged, never raised."""
    dimension = stat.dimension
    batch = as_batch(points, dimension) if dimension is not None else np.atleast_2d(np.asarray(points, float))
    result = _EVALUATORS[stat.kind](stat, batch)
    if result.degenerate.any():
        logger.debug("%s: %d degenerate points", stat.identifier, int(result.degenerate.sum()))
    return result


# Constructors


def max_lr_statistic(null: Density, alternatives: Sequence[Density], label: str = "") -> TestStatistic:
    return TestStatistic(StatisticKind.MAX_LR, null_density=null, alternatives=tuple(alternatives), label=label)


def avg_lr_statistic(
    null: Density,
    alternatives: Sequence[Density],
    weights: Optional[Sequence[float]] = None,
    label: str = "",
) -> TestStatistic:
    return TestStatistic(
        StatisticKind.AVG_LR,
        null_density=null,
        alternatives=tuple(alternatives),
        weights=tuple(float(w) for w in weights) if weights is not None else None,
        label=label,
    )


def family_statistic(
    kind: StatisticKind,
    f_base: Base1D,
    g_base: Base1D,
    quad: Optional[QuadratureSpec] = None,
    label: str = "",
) -> TestStatistic:
    return TestStatistic(kind, f_base=f_base, g_base=g_base, quad=quad or QuadratureSpec(), label=label)


# Single-point operations


@dataclass(frozen=True)
class PointValue:
    """One statistic value; ``degenerate`` marks points where every density vanishes."""

    value: float
    degenerate: bool


def evaluate_point(stat: TestStatistic, x) -> PointValue:
    """Evaluate a simple-hypothesis statistic at one point of its sample space."""
    if stat.kind.uses_families:
        raise DensityError(f"{stat.kind.value} has no fixed sample space; use its family function")
    point = as_point(x, stat.dimension)
    result = evaluate_batch(stat, point[None, :])
    return PointValue(value=float(result.values[0]), degenerate=bool(result.degenerate[0]))


def max_lr(x, stat: TestStatistic) -> float:
    """max_i log p_i(x) - log p0(x); -inf when every density vanishes at x."""
    if stat.kind is not StatisticKind.MAX_LR:
        raise DensityError(f"expected a max-lr statistic, got {stat.kind.value}")
    return evaluate_point(stat, x).value


def avg_lr(x, stat: TestStatistic) -> float:
    """log sum_i w_i p_i(x) - log p0(x)."""
    if stat.kind is not StatisticKind.AVG_LR:
        raise DensityError(f"expected an avg-lr statistic, got {stat.kind.value}")
    return evaluate_point(stat, x).value


def _raise_quadrature(label: str, num: LogIntegral, den: LogIntegral) -> None:
    if num.failed[0] or den.failed[0]:
        failing = num if num.failed[0] else den
        raise QuadratureError(
            f"{label}: quadrature did not converge",
            estimate=float(failing.log_value[0]),
            error_bound=float(failing.rel_error[0]),
        )


def _real_vector(x) -> np.ndarray:
    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if point.ndim != 1 or not np.all(np.isfinite(point)):
        raise DensityError("expected a finite real vector")
    return point[None, :]


def integrated_lr_location(x, f_base: Base1D, g_base: Base1D, quad: Optional[QuadratureSpec] = None) -> float:
    """log ∫ ∏ g(x_i - θ) dθ - log ∫ ∏ f(x_i - θ) dθ."""
    points = _real_vector(x)
    quad = quad or QuadratureSpec()
    num = location_integrals(points, g_base, quad)
    den = location_integrals(points, f_base, quad)
    _raise_quadrature("integrated location LR", num, den)
    return float(num.log_value[0] - den.log_value[0])


def integrated_lr_scale(x, f_base: Base1D, g_base: Base1D, quad: Optional[QuadratureSpec] = None) -> float:
    """log ∫ ν^(n-1) ∏ g(ν x_i) dν - log ∫ ν^(n-1) ∏ f(ν x_i) dν."""
    points = _real_vector(x)
    positive = f_base.support == "positive" or g_base.support == "positive"
    if positive and np.any(points <= 0):
        raise DensityError("scale statistics on positive bases need every x_i > 0")
    quad = (quad or QuadratureSpec()).model_copy(update={"transform": "log-atan"})
    num = scale_integrals(points, g_base, quad)
    den = scale_integrals(points, f_base, quad)
    _raise_quadrature("integrated scale LR", num, den)
    return float(num.log_value[0] - den.log_value[0])


def _check_fit(fit: ProfileFit, label: str) -> None:
    if not fit.converged[0]:
        raise OptimizerError(
            f"{label}: maximum likelihood search did not converge",
            best_iterate=float(fit.argmax[0]),
            gradient=float(fit.gradient[0]),
        )


def mle_location(x, base: Base1D) -> float:
    fit = fit_location(_real_vector(x), base)
    _check_fit(fit, f"location MLE ({base.name})")
    return float(fit.argmax[0])


def mle_scale(x, base: Base1D) -> float:
    points = _real_vector(x)
    if base.support == "positive" and np.any(points <= 0):
        raise DensityError("scale MLE on a positive base needs every x_i > 0")
    fit = fit_scale(points, base)
    _check_fit(fit, f"scale MLE ({base.name})")
    return float(np.exp(fit.argmax[0]))


def max_lr_location(x, f_base: Base1D, g_base: Base1D) -> float:
    """sum log g(x_i - θ̂1) - sum log f(x_i - θ̂0) at the respective MLEs."""
    points = _real_vector(x)
    fit_g = fit_location(points, g_base)
    fit_f = fit_location(points, f_base)
    _check_fit(fit_g, f"location MLE ({g_base.name})")
    _check_fit(fit_f, f"location MLE ({f_base.name})")
    return float(fit_g.value[0] - fit_f.value[0])


def max_lr_scale(x, f_base: Base1D, g_base: Base1D) -> float:
    points = _real_vector(x)
    if (f_base.support == "positive" or g_base.support == "positive") and np.any(points <= 0):
        raise DensityError("scale statistics on positive bases need every x_i > 0")
    fit_g = fit_scale(points, g_base)
    fit_f = fit_scale(points, f_base)
    _check_fit(fit_g, f"scale MLE ({g_base.name})")
    _check_fit(fit_f, f"scale MLE ({f_base.name})")
    return float(fit_g.value[0] - fit_f.value[0])
