"""Exact oracles: closed-form n = 1 regions and powers, and discretized problems.

Discretized problems replace the unit interval (or square) by equal cells.
Invariant tests are then unions of symmetry blocks, so the best invariant
region can be found by enumerating block subsets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import integrate

from ..common.errors import ConfigError, UnsupportedShapeError
from ..densities.service import QuadAlternatives, SymmetricPair
from ..densities.shapes import Curvature, Shape1D
from ..statistics.service import TestStatistic
from .schemas import AnalyticRegions, PowerRange, Region, RegionResult
from .service import critical_value

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12
POWER_TOL = 1e-12
MAX_CELLS_1D = 64
MAX_BLOCKS = 24
ENUM_CHUNK = 1 << 16
GRID_RESOLUTION = 1 << 20
ENUMERATION_CELLS = 20


def analytic_region_n1(shape: Shape1D, alpha: float) -> AnalyticRegions:
    """Rejection regions at n = 1 under the uniform null.

    The max-LR test rejects for large |x - 1/2|; the avg-LR test does the same
    for convex shapes and rejects for small |x - 1/2| for concave ones.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError("invalid alpha", [f"alpha must lie in (0, 1), got {alpha}"])
    if not shape.monotone_increasing:
        raise UnsupportedShapeError(f"{shape.name}: closed-form regions need an increasing shape")
    if shape.curvature is Curvature.NEITHER:
        raise UnsupportedShapeError(f"{shape.name}: curvature must be convex or concave")
    tails = Region(intervals=[(0.0, alpha / 2.0), (1.0 - alpha / 2.0, 1.0)])
    if shape.curvature is Curvature.CONVEX:
        avg = tails
    else:
        avg = Region(intervals=[(0.5 - alpha / 2.0, 0.5 + alpha / 2.0)])
    return AnalyticRegions(
        shape=shape.name,
        curvature=shape.curvature.value,
        alpha=alpha,
        max_lr=tails,
        avg_lr=avg,
    )


def exact_power_n1(shape: Shape1D, region: Region) -> float:
    """Integral of f over the region; quadrature at 1e-12 when no closed-form CDF exists."""
    total = 0.0
    for lo, hi in region.intervals:
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError("invalid region", [f"interval ({lo}, {hi}) is not inside (0, 1)"])
        if shape.has_closed_form_cdf:
            total += float(shape.cdf(hi) - shape.cdf(lo))
        else:
            value, _ = integrate.quad(shape.pdf, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
            total += float(value)
    return total


@dataclass(frozen=True)
class DiscreteProblem:
    """Cell probabilities under the null and each alternative, plus the symmetry blocks.

    Cells are 0-based; ``pairing`` maps each cell to its image under the first
    non-identity reflection and ``blocks`` are the group orbits of cells.
    """

    m: int
    p0: np.ndarray
    alternatives: np.ndarray
    pairing: np.ndarray
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        vectors = np.vstack([self.p0[None, :], self.alternatives])
        if np.any(vectors < 0):
            raise ConfigError("cell probabilities must be nonnegative")
        sums = vectors.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > MASS_TOL):
            raise ConfigError("cell probabilities must sum to 1", [f"sums: {sums.tolist()}"])
        if not np.array_equal(self.pairing[self.pairing], np.arange(self.cells)):
            raise ConfigError("the cell pairing must be an involution")

    @property
    def cells(self) -> int:
        return self.p0.size

    @property
    def mixture(self) -> np.ndarray:
        return self.alternatives.mean(axis=0)

    def block_masses(self) -> tuple[np.ndarray, np.ndarray]:
        """Null mass and p1 mass of every block."""
        null = np.array([self.p0[list(block)].sum() for block in self.blocks])
        power = np.array([self.alternatives[0, list(block)].sum() for block in self.blocks])
        return null, power


def _check_even(m: int, limit: Optional[int]) -> None:
    if m < 2 or m % 2:
        raise ConfigError("invalid cell count", [f"m must be an even integer >= 2, got {m}"])
    if limit is not None and m > limit:
        raise ConfigError("invalid cell count", [f"m must be <= {limit}, got {m}"])


def discretize(problem: Union[SymmetricPair, QuadAlternatives], m: int) -> DiscreteProblem:
    edges = np.linspace(0.0, 1.0, m + 1)
    if isinstance(problem, SymmetricPair):
        if problem.n != 1:
            raise ConfigError("invalid problem", ["discretization of a symmetric pair needs n = 1"])
        _check_even(m, MAX_CELLS_1D)
        p1 = np.diff(problem.shape.cdf(edges))
        pairing = np.arange(m)[::-1].copy()
        blocks = tuple((i, m - 1 - i) for i in range(m // 2))
        return DiscreteProblem(
            m=m,
            p0=np.full(m, 1.0 / m),
            alternatives=np.vstack([p1, p1[::-1]]),
            pairing=pairing,
            blocks=blocks,
        )
    if isinstance(problem, QuadAlternatives):
        _check_even(m, None)
        grid = problem.f2.cell_mass(edges, edges)
        alternatives = np.vstack(
            [grid.ravel(), grid[::-1, :].ravel(), grid[:, ::-1].ravel(), grid[::-1, ::-1].ravel()]
        )
        index = np.arange(m * m).reshape(m, m)
        pairing = index[::-1, :].ravel()
        half = m // 2
        blocks = tuple(
            (
                int(index[i, j]),
                int(index[m - 1 - i, j]),
                int(index[i, m - 1 - j]),
                int(index[m - 1 - i, m - 1 - j]),
            )
            for i in range(half)
            for j in range(half)
        )
        return DiscreteProblem(
            m=m,
            p0=np.full(m * m, 1.0 / (m * m)),
            alternatives=alternatives,
            pairing=pairing,
            blocks=blocks,
        )
    raise ConfigError(f"cannot discretize {type(problem).__name__}")


@dataclass(frozen=True)
class _Enumeration:
    count: int
    best_power: float
    best_subset: int
    maximizers: int
    worst_power: float
    worst_subset: int


def _bits(subset: int, size: int) -> list[int]:
    return [b for b in range(size) if subset >> b & 1]


def _enumerate(null: np.ndarray, power: np.ndarray, alpha: float, exact: bool) -> _Enumeration:
    """Scan every subset of blocks; feasible means mass <= alpha (or == alpha when ``exact``)."""
    size = null.size
    shifts = np.arange(size, dtype=np.int64)
    count = 0
    maximizers = 0
    best = (-np.inf, 0)
    worst = (np.inf, 0)
    for start in range(0, 1 << size, ENUM_CHUNK):
        subsets = np.arange(start, min(start + ENUM_CHUNK, 1 << size), dtype=np.int64)
        bits = ((subsets[:, None] >> shifts) & 1).astype(np.float64)
        mass = bits @ null
        if exact:
            feasible = np.abs(mass - alpha) <= MASS_TOL
        else:
            feasible = mass <= alpha + MASS_TOL
        if not feasible.any():
            continue
        values = bits[feasible] @ power
        ids = subsets[feasible]
        count += int(feasible.sum())
        top = int(np.argmax(values))
        if values[top] > best[0] + POWER_TOL:
            best = (float(values[top]), int(ids[top]))
            maximizers = 0
        maximizers += int(np.sum(values >= best[0] - POWER_TOL))
        low = int(np.argmin(values))
        if values[low] < worst[0] - POWER_TOL:
            worst = (float(values[low]), int(ids[low]))
    if count == 0:
        return _Enumeration(0, float("nan"), 0, 0, float("nan"), 0)
    return _Enumeration(count, best[0], best[1], maximizers, worst[0], worst[1])


def np_region_discrete(p0_cells, p1_cells, alpha: float) -> RegionResult:
    """Non-randomized Neyman-Pearson region: cells by ratio p1/p0 descending, ties by index.

    Cells are added while the null mass stays within alpha; a cell that would
    exceed it is skipped and the scan goes on. Up to 20 cells the greedy union is
    checked against enumeration, which wins only with strictly more power.
    Returned cells are 1-based.
    """
    p0 = np.asarray(p0_cells, dtype=np.float64)
    p1 = np.asarray(p1_cells, dtype=np.float64)
    if p0.shape != p1.shape or p0.ndim != 1:
        raise ConfigError("cell vectors must be one-dimensional and of equal length")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p0 > 0, p1 / np.where(p0 > 0, p0, 1.0), np.where(p1 > 0, np.inf, 0.0))
    order = np.argsort(-ratio, kind="stable")
    chosen = []
    mass = 0.0
    for cell in order:
        if mass + p0[cell] > alpha + MASS_TOL:
            continue
        chosen.append(int(cell))
        mass += p0[cell]
    chosen.sort()
    if p0.size <= ENUMERATION_CELLS:
        best = _enumerate(p0, p1, alpha, exact=False)
        if best.best_power > float(p1[chosen].sum()) + POWER_TOL:
            logger.debug("greedy NP region beaten by enumeration (%.12g)", best.best_power)
            chosen = _bits(best.best_subset, p0.size)
    return RegionResult(
        cells=[c + 1 for c in chosen],
        power=float(p1[chosen].sum()) if chosen else 0.0,
        null_mass=float(p0[chosen].sum()) if chosen else 0.0,
    )


def best_region_by_enumeration(p0_cells, p1_cells, alpha: float) -> RegionResult:
    """Most powerful non-randomized level-alpha cell union, by brute force over cells."""
    p0 = np.asarray(p0_cells, dtype=np.float64)
    p1 = np.asarray(p1_cells, dtype=np.float64)
    if p0.size > ENUMERATION_CELLS:
        raise ConfigError(f"enumeration over cells is limited to {ENUMERATION_CELLS} cells")
    result = _enumerate(p0, p1, alpha, exact=False)
    cells = _bits(result.best_subset, p0.size)
    return RegionResult(
        cells=[c + 1 for c in cells],
        power=result.best_power,
        null_mass=float(p0[cells].sum()),
        maximizer_count=result.maximizers,
    )


def _cells_of(dp: DiscreteProblem, block_ids: list[int]) -> list[int]:
    return sorted(c for b in block_ids for c in dp.blocks[b])


def best_invariant_region(dp: DiscreteProblem, alpha: float, allow_greedy: bool = True) -> RegionResult:
    """Most powerful union of symmetry blocks with null mass <= alpha.

    Exhaustive up to 24 blocks; beyond that a greedy-by-ratio fallback is used
    and the result is flagged ``enumerated=False``. The avg-LR (mixture NP)
    region is certified against the maximum.
    """
    null, power = dp.block_masses()
    avg = np_region_discrete(dp.p0, dp.mixture, alpha)
    avg_cells = [c - 1 for c in avg.cells]
    avg_power = float(dp.alternatives[0, avg_cells].sum()) if avg_cells else 0.0

    if len(dp.blocks) <= MAX_BLOCKS:
        result = _enumerate(null, power, alpha, exact=False)
        block_ids = _bits(result.best_subset, len(dp.blocks))
        best_power = result.best_power
        enumerated = True
        maximizers = result.maximizers
    elif allow_greedy:
        logger.warning("%d symmetry blocks exceed the enumeration limit; using the greedy fallback", len(dp.blocks))
        with np.errstate(divide="ignore"):
            ratio = power / null
        block_ids = []
        mass = 0.0
        for block in np.argsort(-ratio, kind="stable"):
            if mass + null[block] > alpha + MASS_TOL:
                break
            block_ids.append(int(block))
            mass += null[block]
        best_power = float(power[block_ids].sum()) if block_ids else 0.0
        enumerated = False
        maximizers = None
    else:
        raise ConfigError(f"{len(dp.blocks)} symmetry blocks exceed the enumeration limit of {MAX_BLOCKS}")

    cells = _cells_of(dp, sorted(block_ids))
    chosen = set(avg_cells)
    avg_invariant = all(set(block) <= chosen or not set(block) & chosen for block in dp.blocks)
    certified = avg_invariant and avg_power >= best_power - POWER_TOL
    if not certified:
        logger.info("avg-LR region power %.12g vs best invariant %.12g", avg_power, best_power)
    return RegionResult(
        cells=[c + 1 for c in cells],
        blocks=[b + 1 for b in sorted(block_ids)],
        power=best_power,
        null_mass=float(dp.p0[cells].sum()) if cells else 0.0,
        enumerated=enumerated,
        maximizer_count=maximizers,
        avg_lr_cells=avg.cells,
        avg_lr_certified=certified,
    )


def invariant_power_range(dp: DiscreteProblem, alpha: float) -> PowerRange:
    """Minimum and maximum power over invariant regions whose null mass is exactly alpha."""
    if len(dp.blocks) > MAX_BLOCKS:
        raise ConfigError(f"{len(dp.blocks)} symmetry blocks exceed the enumeration limit of {MAX_BLOCKS}")
    null, power = dp.block_masses()
    result = _enumerate(null, power, alpha, exact=True)
    if result.count == 0:
        raise ConfigError("no invariant region has null mass exactly alpha", [f"alpha={alpha}, m={dp.m}"])
    size = len(dp.blocks)
    return PowerRange(
        alpha=alpha,
        regions=result.count,
        min_power=result.worst_power,
        min_blocks=[b + 1 for b in _bits(result.worst_subset, size)],
        max_power=result.best_power,
        max_blocks=[b + 1 for b in _bits(result.best_subset, size)],
    )


def block_of_region(dp: DiscreteProblem, region: Region) -> list[int]:
    """1-based blocks whose cells lie inside ``region`` (1-D problems)."""
    inside = set(np.flatnonzero(_contains(region, unit_grid(dp.m)[:, 0])).tolist())
    return [b + 1 for b, block in enumerate(dp.blocks) if set(block) <= inside]


def unit_grid(resolution: int) -> np.ndarray:
    """Cell midpoints of an equal partition of (0, 1), as a ``(K, 1)`` batch."""
    return ((np.arange(resolution) + 0.5) / resolution)[:, None]


def region_on_grid(decisions: np.ndarray) -> Region:
    """Intervals covered by the cells whose decision is true."""
    flags = np.asarray(decisions, dtype=bool)
    resolution = flags.size
    padded = np.concatenate([[False], flags, [False]])
    changes = np.flatnonzero(padded[1:] != padded[:-1])
    starts, stops = changes[0::2], changes[1::2]
    return Region(intervals=[(float(a / resolution), float(b / resolution)) for a, b in zip(starts, stops)])


def grid_region(stat: TestStatistic, alpha: float, resolution: int = GRID_RESOLUTION) -> tuple[float, Region]:
    """Deterministic n = 1 calibration under the uniform null: threshold the statistic on a fine grid."""
    values = stat.evaluate(unit_grid(resolution)).values
    threshold = critical_value(values, alpha)
    with np.errstate(invalid="ignore"):
        return threshold, region_on_grid(values > threshold)


def region_discrepancy(left: Region, right: Region, resolution: int = GRID_RESOLUTION) -> float:
    """Lebesgue measure of the symmetric difference, on a fine grid."""
    x = unit_grid(resolution)[:, 0]
    return float(np.mean(_contains(left, x) != _contains(right, x)))


def _contains(region: Region, x: np.ndarray) -> np.ndarray:
    inside = np.zeros(x.shape, dtype=bool)
    for lo, hi in region.intervals:
        inside |= (x > lo) & (x < hi)
    return inside
