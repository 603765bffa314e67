"""Profile maximum likelihood for one-parameter location and scale families.

The search is vectorized over rows: every row gets a candidate grid (data
quantile seeds, plus a uniform sweep when the base is not log-concave), the
best grid point is bracketed by its neighbours and a golden-section search
refines it. A central-difference gradient certifies each returned optimum; rows
that fail the check are polished one at a time with bounded Brent search from
``scipy.optimize``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np
from scipy import optimize

from ..densities.shapes import Base1D

logger = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
SEED_COUNT = 16
UNIFORM_COUNT = 48
PARAM_TOL = 1e-10
MAX_ITER = 200
GRAD_STEP = 1e-6
GRAD_TOL = 1e-6
POLISH_ITER = 500

Profile = Callable[[np.ndarray], np.ndarray]
ProfileFactory = Callable[[np.ndarray], Profile]


@dataclass(frozen=True)
class ProfileFit:
    """Per-row optimum of a profile log-likelihood in its working parameter."""

    argmax: np.ndarray
    value: np.ndarray
    gradient: np.ndarray
    converged: np.ndarray


def maximize_profile(points: np.ndarray, make_profile: ProfileFactory, seeds: np.ndarray, multimodal: bool) -> ProfileFit:
    """Maximize the profile of every row of ``points``; ``seeds`` has shape ``(N, k)``.

    ``make_profile(points)(params)`` takes one parameter per row and returns one
    value per row.
    """
    profile = make_profile(points)
    lo = seeds.min(axis=1)
    hi = seeds.max(axis=1)
    grid = seeds
    if multimodal:
        sweep = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, UNIFORM_COUNT)[None, :]
        grid = np.concatenate([seeds, sweep], axis=1)
    grid = np.sort(grid, axis=1)
    values = np.stack([profile(grid[:, k]) for k in range(grid.shape[1])], axis=1)
    values = np.where(np.isnan(values), -np.inf, values)

    rows = np.arange(grid.shape[0])
    best = np.argmax(values, axis=1)
    best_param = grid[rows, best]
    best_value = values[rows, best]
    a = grid[rows, np.maximum(best - 1, 0)]
    b = grid[rows, np.minimum(best + 1, grid.shape[1] - 1)]
    bracket = np.stack([a, b], axis=1)

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = profile(c)
    fd = profile(d)
    for _ in range(MAX_ITER):
        open_rows = (b - a) > PARAM_TOL * np.maximum(1.0, np.abs(a + b) / 2.0)
        if not open_rows.any():
            break
        left = (fc > fd) & open_rows
        right = ~left & open_rows
        b = np.where(left, d, b)
        a = np.where(right, c, a)
        shifted_d = np.where(left, c, d)
        shifted_c = np.where(right, d, c)
        shifted_fd = np.where(left, fc, fd)
        shifted_fc = np.where(right, fd, fc)
        probe = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        fprobe = profile(probe)
        c = np.where(left, probe, shifted_c)
        fc = np.where(left, fprobe, shifted_fc)
        d = np.where(right, probe, shifted_d)
        fd = np.where(right, fprobe, shifted_fd)

    refined = (a + b) / 2.0
    refined_value = profile(refined)
    better = refined_value >= best_value
    argmax = np.where(better, refined, best_param)
    value = np.where(better, refined_value, best_value)

    gradient = _gradient(profile, argmax)
    closed = (b - a) <= PARAM_TOL * np.maximum(1.0, np.abs(a + b) / 2.0)
    converged = closed & _flat(gradient, argmax)
    if not converged.all():
        argmax, value, gradient, converged = _polish_rows(points, make_profile, bracket, argmax, value, gradient, converged)
    if not converged.all():
        logger.debug("profile search left %d of %d rows unconverged", int((~converged).sum()), converged.size)
    return ProfileFit(argmax=argmax, value=value, gradient=gradient, converged=converged)


def _flat(gradient: np.ndarray, argmax: np.ndarray) -> np.ndarray:
    return np.abs(gradient) < GRAD_TOL * (1.0 + np.abs(argmax))


def _gradient(profile: Profile, at: np.ndarray) -> np.ndarray:
    return (profile(at + GRAD_STEP) - profile(at - GRAD_STEP)) / (2.0 * GRAD_STEP)


def _negated(t: float, profile: Profile) -> float:
    return -float(profile(np.array([t]))[0])


def _polish_rows(points, make_profile, bracket, argmax, value, gradient, converged):
    """Re-run each unconverged row as a scalar problem with ``minimize_scalar``."""
    argmax, value, gradient, converged = argmax.copy(), value.copy(), gradient.copy(), converged.copy()
    for row in np.flatnonzero(~converged):
        lo, hi = bracket[row]
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
            continue
        profile = make_profile(points[row : row + 1])
        result = optimize.minimize_scalar(
            _negated,
            bounds=(lo, hi),
            args=(profile,),
            method="bounded",
            options={"xatol": PARAM_TOL, "maxiter": POLISH_ITER},
        )
        if not result.success or -result.fun < value[row]:
            continue
        at = np.array([result.x])
        argmax[row] = result.x
        value[row] = -result.fun
        gradient[row] = _gradient(profile, at)[0]
        converged[row] = bool(_flat(gradient[row : row + 1], at)[0])
    return argmax, value, gradient, converged


def location_profile(points: np.ndarray, base: Base1D) -> Profile:
    def profile(theta: np.ndarray) -> np.ndarray:
        return base.log_pdf(points - theta[:, None]).sum(axis=1)

    return profile


def scale_profile(points: np.ndarray, base: Base1D) -> Profile:
    """Profile in u = log tau: -n u + sum log base(x_i e^-u)."""
    n = points.shape[1]

    def profile(u: np.ndarray) -> np.ndarray:
        return -n * u + base.log_pdf(points * np.exp(-u)[:, None]).sum(axis=1)

    return profile


def location_seeds(points: np.ndarray) -> np.ndarray:
    levels = np.linspace(0.0, 1.0, SEED_COUNT)
    seeds = np.quantile(points, levels, axis=1).T
    return np.concatenate([seeds, np.median(points, axis=1)[:, None]], axis=1)


def scale_seeds(points: np.ndarray, base: Base1D) -> np.ndarray:
    """Log quantile-matched scales, their geometric mean, and one unit of slack either side."""
    levels = np.linspace(0.05, 0.95, SEED_COUNT)
    magnitudes = np.abs(points)
    data_q = np.quantile(magnitudes, levels, axis=1).T
    base_q = np.abs(base.ppf(levels)) if base.support == "positive" else np.abs(base.ppf(0.5 + levels / 2.0))
    with np.errstate(divide="ignore"):
        matched = np.log(data_q) - np.log(base_q)[None, :]
    matched = np.where(np.isfinite(matched), matched, np.nan)
    center = np.nanmean(matched, axis=1, keepdims=True)
    lo = np.nanmin(matched, axis=1, keepdims=True) - 1.0
    hi = np.nanmax(matched, axis=1, keepdims=True) + 1.0
    seeds = np.concatenate([lo, np.where(np.isnan(matched), center, matched), center, hi], axis=1)
    return seeds


def fit_location(points: np.ndarray, base: Base1D) -> ProfileFit:
    if points.shape[1] == 1:
        value = base.log_pdf(points[:, 0] - points[:, 0])
        zeros = np.zeros(points.shape[0])
        return ProfileFit(argmax=points[:, 0].copy(), value=value, gradient=zeros, converged=np.ones_like(zeros, bool))
    seeds = location_seeds(points)
    return maximize_profile(points, partial(location_profile, base=base), seeds, multimodal=not base.log_concave)


def fit_scale(points: np.ndarray, base: Base1D) -> ProfileFit:
    """Fit in u = log tau; ``argmax`` and ``gradient`` are in that parameter."""
    seeds = scale_seeds(points, base)
    return maximize_profile(points, partial(scale_profile, base=base), seeds, multimodal=not base.log_concave)
