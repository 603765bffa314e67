"""Sample spaces, densities and the alternative families used by every experiment.

All densities are evaluated in the log domain and vectorized over a batch of
points of shape ``(N, n)``. Off-support points evaluate to ``-inf`` instead of
raising, so ratio statistics degrade gracefully.
"""

from __future__ import annotations

import logging
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats
from scipy.special import logsumexp

from ..common.errors import DensityError
from ..common.utils import as_point
from .schemas import DensityVerification
from .shapes import Base1D, Shape1D, check_shape, convex_shape

logger = logging.getLogger(__name__)

BOUNDED_TOL = 1e-8
TRUNCATED_TOL = 1e-6
KS_LIMIT = 0.01
WEIGHT_TOL = 1e-12


class SpaceKind(str, Enum):
    UNIT_CUBE = "unit-cube"
    UNIT_SQUARE = "unit-square"
    REAL_VECTOR = "real-vector"
    POSITIVE_VECTOR = "positive-vector"


@dataclass(frozen=True)
class SampleSpace:
    kind: SpaceKind
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DensityError(f"dimension must be >= 1, got {self.n}")
        if self.kind is SpaceKind.UNIT_SQUARE and self.n != 2:
            raise DensityError("the unit square has dimension 2")

    @property
    def bounded(self) -> bool:
        return self.kind in (SpaceKind.UNIT_CUBE, SpaceKind.UNIT_SQUARE)

    def bounds(self) -> Optional[list[tuple[float, float]]]:
        if self.bounded:
            return [(0.0, 1.0)] * self.n
        return None

    def contains(self, points: np.ndarray) -> np.ndarray:
        if self.bounded:
            return np.all((points >= 0.0) & (points <= 1.0), axis=1)
        if self.kind is SpaceKind.POSITIVE_VECTOR:
            return np.all(points > 0.0, axis=1)
        return np.all(np.isfinite(points), axis=1)


class Density(ABC):
    """A log-density plus sampler over a declared sample space."""

    name: str

    @property
    @abstractmethod
    def space(self) -> SampleSpace:
        ...

    @abstractmethod
    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        ...

    def log_pdf(self, points: np.ndarray) -> np.ndarray:
        """Vectorized log-density over ``(N, n)`` points; ``-inf`` off the support."""
        inside = self.space.contains(points)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self._log_pdf(np.where(inside[:, None], points, self._safe_point()))
        return np.where(inside, values, -np.inf)

    def cdf_1d(self, x: np.ndarray) -> Optional[np.ndarray]:
        return None

    @property
    def center(self) -> float:
        return 0.5 if self.space.bounded else 0.0

    def _safe_point(self) -> float:
        return 0.5 if self.space.bounded else 1.0


@dataclass(frozen=True)
class UniformDensity(Density):
    dimension: int
    kind: SpaceKind = SpaceKind.UNIT_CUBE
    name: str = "uniform"

    @property
    def space(self) -> SampleSpace:
        return SampleSpace(self.kind, self.dimension)

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        return np.zeros(points.shape[0])

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.random((count, self.dimension))

    def cdf_1d(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class IidShapeDensity(Density):
    """p(x) = prod f(x_i), or prod f(1 - x_i) when ``reflected``."""

    shape: Shape1D
    dimension: int
    reflected: bool = False

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"{self.shape.name}{'-reflected' if self.reflected else ''}"

    @property
    def space(self) -> SampleSpace:
        return SampleSpace(SpaceKind.UNIT_CUBE, self.dimension)

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        coords = 1.0 - points if self.reflected else points
        return self.shape.log_pdf(coords).sum(axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        draws = self.shape.sample(rng, (count, self.dimension))
        return 1.0 - draws if self.reflected else draws

    def cdf_1d(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self.dimension != 1:
            return None
        if self.reflected:
            return 1.0 - self.shape.cdf(1.0 - np.asarray(x, dtype=np.float64))
        return self.shape.cdf(x)


@dataclass(frozen=True)
class ProductBivariate:
    """f2(x, y) = fx(x) fy(y); strictly increasing in both variables when both shapes are."""

    shape_x: Shape1D
    shape_y: Shape1D
    name: str = "product"

    def log_pdf(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.shape_x.log_pdf(x) + self.shape_y.log_pdf(y)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        u = rng.random((count, 2))
        return np.column_stack([self.shape_x.ppf(u[:, 0]), self.shape_y.ppf(u[:, 1])])

    def cell_mass(self, x_edges: np.ndarray, y_edges: np.ndarray) -> np.ndarray:
        px = np.diff(self.shape_x.cdf(x_edges))
        py = np.diff(self.shape_y.cdf(y_edges))
        return np.outer(px, py)


@dataclass(frozen=True)
class QuadDensity(Density):
    """f2 evaluated after optionally reflecting each coordinate of the unit square."""

    f2: ProductBivariate
    flip_x: bool = False
    flip_y: bool = False

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"{self.f2.name}[{'1-x' if self.flip_x else 'x'},{'1-y' if self.flip_y else 'y'}]"

    @property
    def space(self) -> SampleSpace:
        return SampleSpace(SpaceKind.UNIT_SQUARE, 2)

    def _flip(self, points: np.ndarray) -> np.ndarray:
        mask = np.array([self.flip_x, self.flip_y])
        return np.where(mask, 1.0 - points, points)

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        coords = self._flip(points)
        return self.f2.log_pdf(coords[:, 0], coords[:, 1])

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self._flip(self.f2.sample(rng, count))


@dataclass(frozen=True)
class LocationFamily(Density):
    """Joint density prod base(x_i - theta) on the real line."""

    base: Base1D
    dimension: int
    theta: float = 0.0

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"{self.base.name}(theta={self.theta:g})"

    @property
    def space(self) -> SampleSpace:
        return SampleSpace(SpaceKind.REAL_VECTOR, self.dimension)

    @property
    def center(self) -> float:
        return self.theta

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        return self.base.log_pdf(points - self.theta).sum(axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.theta + self.base.sample(rng, (count, self.dimension))

    def cdf_1d(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self.dimension != 1:
            return None
        return self.base.cdf(np.asarray(x, dtype=np.float64) - self.theta)


@dataclass(frozen=True)
class ScaleFamily(Density):
    """Joint density tau^-n prod base(x_i / tau).

    Positive bases live on the positive orthant; symmetric bases on the whole line.
    """

    base: Base1D
    dimension: int
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise DensityError(f"scale parameter must be positive, got {self.tau}")
        if self.base.support != "positive" and not self.base.symmetric:
            raise DensityError(f"scale base {self.base.name} must be positive or symmetric about 0")

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"{self.base.name}(tau={self.tau:g})"

    @property
    def space(self) -> SampleSpace:
        kind = SpaceKind.POSITIVE_VECTOR if self.base.support == "positive" else SpaceKind.REAL_VECTOR
        return SampleSpace(kind, self.dimension)

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        return self.base.log_pdf(points / self.tau).sum(axis=1) - self.dimension * np.log(self.tau)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.tau * self.base.sample(rng, (count, self.dimension))

    def cdf_1d(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self.dimension != 1:
            return None
        return self.base.cdf(np.asarray(x, dtype=np.float64) / self.tau)

    @property
    def center(self) -> float:
        return self.tau


@dataclass(frozen=True)
class MixtureDensity(Density):
    """sum_k w_k p_k; the sampler picks one component per draw."""

    components: tuple[Density, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise DensityError("a mixture needs at least one component")
        if len(self.components) != len(self.weights):
            raise DensityError("one weight per mixture component is required")
        weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise DensityError("mixture weights must be nonnegative and sum to 1")
        spaces = {component.space for component in self.components}
        if len(spaces) != 1:
            raise DensityError("mixture components must share one sample space")

    @property
    def name(self) -> str:  # type: ignore[override]
        terms = " + ".join(f"{w:g}*{c.name}" for w, c in zip(self.weights, self.components))
        return f"mixture({terms})"

    @property
    def space(self) -> SampleSpace:
        return self.components[0].space

    def _log_pdf(self, points: np.ndarray) -> np.ndarray:
        logs = np.stack([component.log_pdf(points) for component in self.components])
        weights = np.asarray(self.weights, dtype=np.float64)[:, None]
        return logsumexp(logs, axis=0, b=weights)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        picks = rng.choice(len(self.components), size=count, p=np.asarray(self.weights))
        draws = np.empty((count, self.space.n))
        for index, component in enumerate(self.components):
            rows = np.flatnonzero(picks == index)
            if rows.size:
                draws[rows] = component.sample(rng, rows.size)
        return draws

    def cdf_1d(self, x: np.ndarray) -> Optional[np.ndarray]:
        parts = [component.cdf_1d(x) for component in self.components]
        if any(part is None for part in parts):
            return None
        return sum(w * part for w, part in zip(self.weights, parts))


@dataclass(frozen=True)
class SymmetricPair:
    shape: Shape1D
    n: int
    p1: IidShapeDensity
    p2: IidShapeDensity

    @property
    def alternatives(self) -> tuple[Density, ...]:
        return (self.p1, self.p2)

    @property
    def null(self) -> UniformDensity:
        return UniformDensity(self.n)


@dataclass(frozen=True)
class QuadAlternatives:
    f2: ProductBivariate
    p1: QuadDensity
    p2: QuadDensity
    p3: QuadDensity
    p4: QuadDensity

    @property
    def alternatives(self) -> tuple[Density, ...]:
        return (self.p1, self.p2, self.p3, self.p4)

    @property
    def null(self) -> UniformDensity:
        return UniformDensity(2, kind=SpaceKind.UNIT_SQUARE)


def reflect(x) -> np.ndarray:
    """Map every coordinate x_i to 1 - x_i."""
    return 1.0 - np.asarray(x, dtype=np.float64)


def log_density_at(density: Density, x) -> float:
    point = as_point(x, density.space.n)
    return float(density.log_pdf(point[None, :])[0])


def sample(density: Density, rng: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise DensityError(f"sample count must be >= 1, got {count}")
    return density.sample(rng, count)


def _integrate(func, bounds: list[tuple[float, float]], center: float) -> tuple[float, float, Optional[str]]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        if len(bounds) == 1:
            lo, hi = bounds[0]
            points = [center] if lo < center < hi else None
            value, error = integrate.quad(
                lambda t: func(np.array([[t]])), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500, points=points
            )
        else:
            (lo_x, hi_x), (lo_y, hi_y) = bounds
            value, error = integrate.dblquad(
                lambda y, x: func(np.array([[x, y]])), lo_x, hi_x, lo_y, hi_y, epsabs=1e-12, epsrel=1e-11
            )
    problems = [str(w.message) for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    return float(value), float(error), "; ".join(problems) or None


def verify_density(
    density: Density,
    bounds: Optional[Sequence[tuple[float, float]]] = None,
    ks_draws: int = 100_000,
    seed: int = 0,
) -> DensityVerification:
    """Integrate exp(log_pdf) over the support and KS-test the sampler (1-D only)."""
    space = density.space
    if space.n > 2:
        raise DensityError("verify_density supports 1-D and 2-D supports only")
    truncated = False
    if bounds is None:
        bounds = space.bounds()
        if bounds is None:
            raise DensityError(f"{density.name}: unbounded support requires truncation bounds")
    else:
        truncated = not space.bounded
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if len(bounds) != space.n:
        raise DensityError(f"expected {space.n} bound pairs, got {len(bounds)}")

    tolerance = TRUNCATED_TOL if truncated else BOUNDED_TOL

    def func(point: np.ndarray) -> float:
        return float(np.exp(density.log_pdf(point))[0])

    integral, abs_error, problem = _integrate(func, bounds, density.center)

    ks_statistic = None
    drawn = 0
    if space.n == 1 and ks_draws > 0:
        rng = np.random.Generator(np.random.Philox(seed))
        draws = density.sample(rng, ks_draws)[:, 0]
        if density.cdf_1d(draws[:1]) is not None:
            ks_statistic = float(stats.kstest(draws, density.cdf_1d).statistic)
            drawn = ks_draws

    if problem is not None:
        status = "quadrature_failed"
        passed = False
        logger.warning("quadrature did not converge for %s: %s", density.name, problem)
    else:
        passed = abs(integral - 1.0) <= tolerance and (ks_statistic is None or ks_statistic < KS_LIMIT)
        status = "ok" if passed else "failed"

    return DensityVerification(
        density=density.name,
        dimension=space.n,
        bounds=bounds,
        truncated=truncated,
        integral=integral,
        abs_error=abs_error,
        tolerance=tolerance,
        passed=passed,
        status=status,
        ks_statistic=ks_statistic,
        ks_draws=drawn,
        message=problem,
    )


def make_symmetric_pair(shape: Shape1D, n: int) -> SymmetricPair:
    if n < 1:
        raise DensityError(f"dimension must be >= 1, got {n}")
    check = check_shape(shape)
    if not (check.monotone_ok and check.curvature_ok):
        raise DensityError(f"shape {shape.name} violates its declared monotonicity or curvature")
    report = verify_density(IidShapeDensity(shape, 1), ks_draws=0)
    if not report.passed:
        raise DensityError(f"shape {shape.name} is not normalized: integral {report.integral:.12g}")
    return SymmetricPair(
        shape=shape,
        n=n,
        p1=IidShapeDensity(shape, n),
        p2=IidShapeDensity(shape, n, reflected=True),
    )


def make_quad_alternatives(f2: Optional[ProductBivariate] = None) -> QuadAlternatives:
    if f2 is None:
        f2 = ProductBivariate(convex_shape(), convex_shape(), name="quad-9x2y2")
    for shape in (f2.shape_x, f2.shape_y):
        if not shape.monotone_increasing:
            raise DensityError(f"{f2.name}: f2 must be strictly increasing in both variables")
    return QuadAlternatives(
        f2=f2,
        p1=QuadDensity(f2),
        p2=QuadDensity(f2, flip_x=True),
        p3=QuadDensity(f2, flip_y=True),
        p4=QuadDensity(f2, flip_x=True, flip_y=True),
    )


def make_mixture(components: Sequence[Density], weights: Sequence[float]) -> MixtureDensity:
    return MixtureDensity(tuple(components), tuple(float(w) for w in weights))
