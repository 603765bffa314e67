"""Monte Carlo calibration, power estimation and paired dominance duels.

Every replicate is drawn from a named substream in fixed-size chunks, so a
run is a pure function of (config, master seed) whatever the worker count.
Rejection is strict: reject iff statistic > critical value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np

from ...services.streams import MonteCarloRunner, SeedBank, Substream
from ..common.errors import CalibrationError, ConfigError
from ..densities.service import Density, SymmetricPair, reflect, sample
from ..statistics.service import TestStatistic
from .schemas import (
    AlternativeDuel,
    CalibrationSummary,
    DuelReport,
    PowerEstimate,
    SizeCheck,
    SymmetricGap,
    Verdict,
)

logger = logging.getLogger(__name__)

MIN_REPLICATES = 1000
FAILURE_LIMIT = 1e-3
NOISE_SE = 3.0


def _seed_label(stream: Substream) -> str:
    return f"{stream.master_seed}/{stream.name}"


def _validate(alpha: float, replicates: int) -> None:
    messages = []
    if not 0.0 < alpha < 1.0:
        messages.append(f"alpha must lie in (0, 1), got {alpha}")
    if replicates < MIN_REPLICATES:
        messages.append(f"replicate count must be >= {MIN_REPLICATES}, got {replicates}")
    if messages:
        raise ConfigError("invalid Monte Carlo settings", messages)


def _evaluate_chunk(
    stats: tuple[TestStatistic, ...], density: Density, stream: Substream, chunk: int, count: int
) -> np.ndarray:
    points = sample(density, stream.generator(chunk), count)
    return np.stack([stat.evaluate(points).values for stat in stats])


def _reflected_chunk(stat: TestStatistic, density: Density, stream: Substream, chunk: int, count: int) -> np.ndarray:
    points = sample(density, stream.generator(chunk), count)
    return np.stack([stat.evaluate(points).values, stat.evaluate(reflect(points)).values])


def _run(
    stats: Sequence[TestStatistic],
    density: Density,
    stream: Substream,
    replicates: int,
    runner: MonteCarloRunner,
) -> np.ndarray:
    """Statistic values of shape ``(len(stats), replicates)``; failed rows are NaN."""
    parts = runner.map_chunks(partial(_evaluate_chunk, tuple(stats), density), stream, replicates)
    return np.concatenate(parts, axis=1)


def _check_failures(values: np.ndarray, label: str) -> float:
    rate = float(np.isnan(values).mean())
    if rate > FAILURE_LIMIT:
        raise CalibrationError(f"{label}: statistic failed on {rate:.3%} of draws (limit {FAILURE_LIMIT:.1%})")
    if rate > 0:
        logger.warning("%s: statistic failed on %.4f%% of draws; counted as non-rejections", label, 100 * rate)
    return rate


def critical_value(values: np.ndarray, alpha: float) -> float:
    """The ceil((1 - alpha) N)-th order statistic; NaN sorts below everything."""
    count = values.size
    rank = max(math.ceil(round((1.0 - alpha) * count, 9)), 1)
    ordered = np.sort(np.where(np.isnan(values), -np.inf, values))
    return float(ordered[rank - 1])


@dataclass(frozen=True)
class CalibratedTest:
    __test__ = False

    statistic: TestStatistic
    alpha: float
    critical_value: float
    replicates: int
    seed: str
    attained_size: float
    failure_rate: float = 0.0

    @property
    def identifier(self) -> str:
        return self.statistic.identifier

    def reject(self, values: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.asarray(values) > self.critical_value

    def decide(self, points) -> np.ndarray:
        return self.reject(self.statistic.evaluate(points).values)

    def summary(self) -> CalibrationSummary:
        return CalibrationSummary(
            statistic=self.statistic.describe(),
            alpha=self.alpha,
            critical_value=self.critical_value,
            replicates=self.replicates,
            seed=self.seed,
            attained_size=self.attained_size,
            failure_rate=self.failure_rate,
        )


def _calibrated(stat: TestStatistic, values: np.ndarray, alpha: float, stream: Substream) -> CalibratedTest:
    failure_rate = _check_failures(values, f"calibration of {stat.identifier}")
    threshold = critical_value(values, alpha)
    with np.errstate(invalid="ignore"):
        attained = float(np.mean(values > threshold))
    logger.info("calibrated %s at alpha=%g: critical value %.9g, attained size %.6f", stat.identifier, alpha, threshold, attained)
    return CalibratedTest(
        statistic=stat,
        alpha=alpha,
        critical_value=threshold,
        replicates=values.size,
        seed=_seed_label(stream),
        attained_size=attained,
        failure_rate=failure_rate,
    )


def calibrate(
    stat: TestStatistic,
    null: Density,
    alpha: float,
    replicates: int,
    stream: Substream,
    runner: Optional[MonteCarloRunner] = None,
) -> CalibratedTest:
    _validate(alpha, replicates)
    values = _run((stat,), null, stream, replicates, runner or MonteCarloRunner())[0]
    return _calibrated(stat, values, alpha, stream)


def _estimate(test: CalibratedTest, values: np.ndarray, alternative: str, stream: Substream) -> PowerEstimate:
    failures = int(np.isnan(values).sum())
    p_hat = float(np.mean(test.reject(values)))
    count = values.size
    return PowerEstimate(
        test=test.identifier,
        alternative=alternative,
        p_hat=p_hat,
        std_error=(p_hat * (1.0 - p_hat) / count) ** 0.5,
        N=count,
        seed=_seed_label(stream),
        failures=failures,
    )


def estimate_power(
    test: CalibratedTest,
    alternative: Density,
    replicates: int,
    stream: Substream,
    runner: Optional[MonteCarloRunner] = None,
) -> PowerEstimate:
    _validate(test.alpha, replicates)
    null = test.statistic.null_density
    if null is not None and alternative.space != null.space:
        raise ConfigError(f"{alternative.name} does not live on the statistic's sample space")
    values = _run((test.statistic,), alternative, stream, replicates, runner or MonteCarloRunner())[0]
    _check_failures(values, f"power of {test.identifier} against {alternative.name}")
    return _estimate(test, values, alternative.name, stream)


def _paired(decisions_a: np.ndarray, decisions_b: np.ndarray) -> tuple[float, float]:
    diff = decisions_a.astype(np.float64) - decisions_b.astype(np.float64)
    se = float(diff.std(ddof=1) / math.sqrt(diff.size)) if diff.size > 1 else 0.0
    return float(diff.mean()), se


def verdict(difference: float, paired_se: float) -> Verdict:
    if abs(difference) <= NOISE_SE * paired_se:
        return "tie_within_noise"
    return "a_dominates" if difference > 0 else "b_dominates"


def duel(
    stat_a: TestStatistic,
    stat_b: TestStatistic,
    null: Density,
    alternatives: Sequence[Density],
    alpha: float,
    n_calib: int,
    n_power: int,
    bank: SeedBank,
    runner: Optional[MonteCarloRunner] = None,
) -> DuelReport:
    """Calibrate both tests on shared null draws and compare them on shared alternative draws."""
    _validate(alpha, n_calib)
    _validate(alpha, n_power)
    if None not in (stat_a.dimension, stat_b.dimension) and stat_a.dimension != stat_b.dimension:
        raise ConfigError("both statistics must act on the same sample space")
    runner = runner or MonteCarloRunner()
    pair = (stat_a, stat_b)

    calib_stream = bank.substream("calibration")
    calib_values = _run(pair, null, calib_stream, n_calib, runner)
    test_a = _calibrated(stat_a, calib_values[0], alpha, calib_stream)
    test_b = _calibrated(stat_b, calib_values[1], alpha, calib_stream)

    rows = []
    for index, alternative in enumerate(alternatives, start=1):
        stream = bank.substream(f"power/{index}")
        values = _run(pair, alternative, stream, n_power, runner)
        for test, row in zip((test_a, test_b), values):
            _check_failures(row, f"power of {test.identifier} against {alternative.name}")
        difference, paired_se = _paired(test_a.reject(values[0]), test_b.reject(values[1]))
        outcome = verdict(difference, paired_se)
        logger.info(
            "%s vs %s against %s: difference %.6f (paired SE %.6f) -> %s",
            test_a.identifier,
            test_b.identifier,
            alternative.name,
            difference,
            paired_se,
            outcome,
        )
        rows.append(
            AlternativeDuel(
                alternative=alternative.name,
                power_a=_estimate(test_a, values[0], alternative.name, stream),
                power_b=_estimate(test_b, values[1], alternative.name, stream),
                difference=difference,
                paired_se=paired_se,
                verdict=outcome,
            )
        )

    size_stream = bank.substream("size-check")
    size_values = _run(pair, null, size_stream, n_calib, runner)
    combined_se = math.sqrt(alpha * (1.0 - alpha) * (2.0 / n_calib))
    checks = []
    for test, row in zip((test_a, test_b), size_values):
        rate = float(np.mean(test.reject(row)))
        checks.append(
            SizeCheck(
                test=test.identifier,
                rate=rate,
                attained_size=test.attained_size,
                combined_se=combined_se,
                N=n_calib,
                seed=_seed_label(size_stream),
                within_3se=abs(rate - test.attained_size) <= NOISE_SE * combined_se,
            )
        )

    return DuelReport(test_a=test_a.summary(), test_b=test_b.summary(), alternatives=rows, size_checks=checks)


def symmetric_power_gap(
    test: CalibratedTest,
    pair: SymmetricPair,
    replicates: int,
    stream: Substream,
    runner: Optional[MonteCarloRunner] = None,
) -> SymmetricGap:
    """Power against p1 and p2 on paired draws: x ~ p1 and its reflection 1 - x ~ p2."""
    _validate(test.alpha, replicates)
    runner = runner or MonteCarloRunner()
    parts = runner.map_chunks(partial(_reflected_chunk, test.statistic, pair.p1), stream, replicates)
    values = np.concatenate(parts, axis=1)
    decisions_p1 = test.reject(values[0])
    decisions_p2 = test.reject(values[1])
    difference, paired_se = _paired(decisions_p1, decisions_p2)
    return SymmetricGap(
        test=test.identifier,
        power_p1=float(decisions_p1.mean()),
        power_p2=float(decisions_p2.mean()),
        difference=difference,
        paired_se=paired_se,
        N=replicates,
        seed=_seed_label(stream),
        within_3se=abs(difference) <= NOISE_SE * paired_se,
    )
