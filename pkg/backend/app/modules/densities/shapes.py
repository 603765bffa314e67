"""One-dimensional building blocks: shapes on (0, 1) and bases on the line or half-line."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np
from scipy import integrate, stats

from .schemas import ShapeCheck

SHAPE_GRID_POINTS = 1000
NORMALIZATION_TOL = 1e-10
CURVATURE_SLACK = 1e-12


class Curvature(str, Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    NEITHER = "neither"


class Shape1D(ABC):
    """A probability density f on (0, 1), evaluated in the log domain."""

    name: str
    monotone_increasing: bool
    curvature: Curvature

    @abstractmethod
    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        ...

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.log_pdf(np.asarray(x, dtype=np.float64)))

    @abstractmethod
    def cdf(self, x) -> np.ndarray:
        ...

    @abstractmethod
    def ppf(self, u) -> np.ndarray:
        ...

    @property
    def has_closed_form_cdf(self) -> bool:
        return False

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.ppf(rng.random(size))


@dataclass(frozen=True)
class PowerShape(Shape1D):
    """f(x) = (k + 1) x^k on (0, 1); CDF x^(k+1) and inverse CDF u^(1/(k+1))."""

    exponent: float
    name: str = ""

    def __post_init__(self) -> None:
        if self.exponent <= -1:
            raise ValueError("exponent must exceed -1 for a normalizable shape")
        if not self.name:
            object.__setattr__(self, "name", f"power-{self.exponent:g}")

    @property
    def monotone_increasing(self) -> bool:  # type: ignore[override]
        return self.exponent > 0

    @property
    def curvature(self) -> Curvature:  # type: ignore[override]
        if self.exponent > 1 or self.exponent < 0:
            return Curvature.CONVEX
        if 0 < self.exponent < 1:
            return Curvature.CONCAVE
        return Curvature.NEITHER

    @property
    def has_closed_form_cdf(self) -> bool:
        return True

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= 0.0) & (x <= 1.0)
        safe = np.where(inside, x, 0.5)
        values = np.full(safe.shape, np.log(self.exponent + 1.0))
        if self.exponent != 0:
            with np.errstate(divide="ignore"):
                values = values + self.exponent * np.log(safe)
        return np.where(inside, values, -np.inf)

    def cdf(self, x) -> np.ndarray:
        clipped = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        return clipped ** (self.exponent + 1.0)

    def ppf(self, u) -> np.ndarray:
        return np.asarray(u, dtype=np.float64) ** (1.0 / (self.exponent + 1.0))


@dataclass(frozen=True)
class CallableShape(Shape1D):
    """A shape given by a plain function; CDF and inverse CDF are tabulated numerically.

    The tabulated CDF is normalized by the function's own integral, so sampling
    works even when the function is not a proper density (verify_density reports that).
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    monotone_increasing: bool = False
    curvature: Curvature = Curvature.NEITHER
    table_points: int = 8193
    _table: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        grid = np.linspace(0.0, 1.0, self.table_points)
        values = np.clip(np.asarray(self.func(grid), dtype=np.float64), 0.0, None)
        cumulative = integrate.cumulative_trapezoid(values, grid, initial=0.0)
        total = cumulative[-1] if cumulative[-1] > 0 else 1.0
        object.__setattr__(self, "_table", (grid, cumulative / total))

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= 0.0) & (x <= 1.0)
        values = np.asarray(self.func(np.where(inside, x, 0.5)), dtype=np.float64)
        with np.errstate(divide="ignore"):
            logs = np.log(np.clip(values, 0.0, None))
        return np.where(inside, logs, -np.inf)

    def cdf(self, x) -> np.ndarray:
        grid, cumulative = self._table
        return np.interp(np.asarray(x, dtype=np.float64), grid, cumulative)

    def ppf(self, u) -> np.ndarray:
        grid, cumulative = self._table
        return np.interp(np.asarray(u, dtype=np.float64), cumulative, grid)


def check_shape(shape: Shape1D) -> ShapeCheck:
    """Check normalization, monotonicity and declared curvature on a 1e3-point grid."""
    integral, abs_error = integrate.quad(shape.pdf, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    grid = np.linspace(0.0, 1.0, SHAPE_GRID_POINTS)
    values = shape.pdf(grid)
    first = np.diff(values)
    second = values[2:] - 2.0 * values[1:-1] + values[:-2]

    monotone_ok = True
    if shape.monotone_increasing:
        monotone_ok = bool(np.all(first >= -CURVATURE_SLACK))

    if shape.curvature is Curvature.CONVEX:
        curvature_ok = bool(np.all(second >= -CURVATURE_SLACK))
    elif shape.curvature is Curvature.CONCAVE:
        curvature_ok = bool(np.all(second <= CURVATURE_SLACK))
    else:
        curvature_ok = True

    return ShapeCheck(
        name=shape.name,
        integral=float(integral),
        abs_error=float(abs_error),
        normalized=bool(abs(integral - 1.0) <= NORMALIZATION_TOL),
        monotone_ok=monotone_ok,
        curvature_ok=curvature_ok,
        min_second_difference=float(second.min()),
        max_second_difference=float(second.max()),
    )


@dataclass(frozen=True)
class Base1D:
    """A scipy distribution used as the base of a location or scale family."""

    name: str
    dist: Any
    support: str = "line"  # "line" or "positive"
    log_concave: bool = True
    symmetric: bool = True

    def log_pdf(self, x) -> np.ndarray:
        return self.dist.logpdf(np.asarray(x, dtype=np.float64))

    def cdf(self, x) -> np.ndarray:
        return self.dist.cdf(np.asarray(x, dtype=np.float64))

    def ppf(self, u) -> np.ndarray:
        return self.dist.ppf(np.asarray(u, dtype=np.float64))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.dist.rvs(size=size, random_state=rng)


def normal_base() -> Base1D:
    return Base1D(name="normal", dist=stats.norm(), support="line")


def cauchy_base() -> Base1D:
    return Base1D(name="cauchy", dist=stats.cauchy(), support="line", log_concave=False)


def logistic_base() -> Base1D:
    return Base1D(name="logistic", dist=stats.logistic(), support="line")


def exponential_base() -> Base1D:
    return Base1D(name="exponential", dist=stats.expon(), support="positive", symmetric=False)


def half_normal_base() -> Base1D:
    return Base1D(name="half-normal", dist=stats.halfnorm(), support="positive", symmetric=False)


def convex_shape() -> PowerShape:
    return PowerShape(exponent=2.0, name="convex-3x2")


def concave_shape() -> PowerShape:
    return PowerShape(exponent=0.5, name="concave-sqrt")
