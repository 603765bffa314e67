"""Log-domain adaptive quadrature over the real line, vectorized over rows.

Each row j has its own log-integrand ℓ_j. The variable is mapped by
z = c_j + tan(t) onto (-pi/2, pi/2), every row is rescaled by its own peak
estimate so all components are O(1), and the vector of integrals is handed to
``scipy.integrate.quad_vec``. Rows of a batch that fails to converge are split
in halves until each failing row is isolated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .schemas import QuadratureSpec

logger = logging.getLogger(__name__)

HALF_PI = np.pi / 2
BREAKPOINTS = 16
PROBE_T = np.linspace(-1.4, 1.4, 29)
BATCH_ROWS = 8192

LogIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LogIntegral:
    log_value: np.ndarray
    rel_error: np.ndarray
    failed: np.ndarray


def _peak_offsets(log_integrand: LogIntegrand, points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    probes = [log_integrand(points, centers + np.tan(t)) for t in PROBE_T]
    return np.max(probes, axis=0)


def _quad_rows(
    log_integrand: LogIntegrand,
    points: np.ndarray,
    centers: np.ndarray,
    offsets: np.ndarray,
    spec: QuadratureSpec,
    bounds: Optional[tuple[float, float]],
):
    if bounds is None:
        lo, hi = -HALF_PI, HALF_PI

        def integrand(t: float) -> np.ndarray:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                values = np.exp(log_integrand(points, centers + np.tan(t)) - offsets) / np.cos(t) ** 2
            return np.where(np.isnan(values), 0.0, values)

    else:
        lo, hi = bounds

        def integrand(t: float) -> np.ndarray:
            with np.errstate(over="ignore", invalid="ignore"):
                values = np.exp(log_integrand(points, np.full(points.shape[0], t)) - offsets)
            return np.where(np.isnan(values), 0.0, values)

    breakpoints = np.linspace(lo, hi, BREAKPOINTS + 1)[1:-1]
    value, error, info = integrate.quad_vec(
        integrand,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        norm="max",
        limit=spec.max_subdivisions,
        points=breakpoints,
        quadrature=spec.scheme,
        full_output=True,
    )
    return np.asarray(value, dtype=np.float64), float(error), bool(info.success)


def _integrate_block(log_integrand, points, centers, offsets, spec, bounds, out_value, out_error, out_failed, rows):
    value, error, success = _quad_rows(log_integrand, points[rows], centers[rows], offsets[rows], spec, bounds)
    if success or rows.size == 1:
        out_value[rows] = value
        with np.errstate(divide="ignore"):
            out_error[rows] = error / value
        out_failed[rows] = np.logical_not(success) | ~(value > 0)
        return
    logger.warning("quadrature did not converge on %d rows; splitting", rows.size)
    half = rows.size // 2
    _integrate_block(log_integrand, points, centers, offsets, spec, bounds, out_value, out_error, out_failed, rows[:half])
    _integrate_block(log_integrand, points, centers, offsets, spec, bounds, out_value, out_error, out_failed, rows[half:])


def integrate_log_batch(
    log_integrand: LogIntegrand,
    points: np.ndarray,
    centers: np.ndarray,
    spec: QuadratureSpec,
    bounds: Optional[tuple[float, float]] = None,
) -> LogIntegral:
    """Return log ∫ exp(ℓ_j(z)) dz for every row j of ``points``.

    ``log_integrand(points, z)`` evaluates ℓ_j(z_j) for a row block and a vector
    of per-row abscissae. Integration is over the real line unless ``bounds``
    are given, in which case ``spec.transform`` must be ``identity``.
    """
    if bounds is not None and spec.transform != "identity":
        raise ValueError("finite bounds require the identity transform")
    total = points.shape[0]
    log_value = np.full(total, -np.inf)
    rel_error = np.full(total, np.inf)
    failed = np.ones(total, dtype=bool)

    for start in range(0, total, BATCH_ROWS):
        block = slice(start, min(start + BATCH_ROWS, total))
        block_points = points[block]
        block_centers = centers[block]
        if bounds is None:
            offsets = _peak_offsets(log_integrand, block_points, block_centers)
        else:
            grid = np.linspace(bounds[0], bounds[1], PROBE_T.size)
            offsets = np.max([log_integrand(block_points, np.full(block_points.shape[0], z)) for z in grid], axis=0)
        usable = np.isfinite(offsets)
        safe_offsets = np.where(usable, offsets, 0.0)

        size = block_points.shape[0]
        value = np.zeros(size)
        error = np.full(size, np.inf)
        block_failed = np.ones(size, dtype=bool)
        rows = np.flatnonzero(usable)
        if rows.size:
            _integrate_block(
                log_integrand, block_points, block_centers, safe_offsets, spec, bounds, value, error, block_failed, rows
            )
        with np.errstate(divide="ignore"):
            log_value[block] = np.log(value) + safe_offsets
        rel_error[block] = error
        failed[block] = block_failed | ~usable

    return LogIntegral(log_value=log_value, rel_error=rel_error, failed=failed)
