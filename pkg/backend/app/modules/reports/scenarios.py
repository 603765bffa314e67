"""Bundled experiment scenarios and the checks each one reports.

A scenario fixes families, default alpha and replicate counts so ``reproduce``
needs no flags. Every scenario returns its tables, JSON records and a list of
pass/fail criteria; the command layer only persists them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy.special import gammaln

from ...services.streams import MonteCarloRunner, SeedBank
from ..common.errors import ConfigError
from ..densities.registry import resolve_base, resolve_bivariate, resolve_shape
from ..densities.service import (
    Density,
    IidShapeDensity,
    LocationFamily,
    QuadAlternatives,
    ScaleFamily,
    SymmetricPair,
    UniformDensity,
    make_mixture,
    make_quad_alternatives,
    make_symmetric_pair,
)
from ..densities.shapes import Shape1D, concave_shape, convex_shape, exponential_base, half_normal_base, normal_base
from ..invariance.service import (
    GroupAction,
    apply,
    composition_consistent,
    induced_permutations,
    is_transitive,
    probe_points,
    quad_reflection_group,
    reflection_group,
)
from ..power.oracles import (
    analytic_region_n1,
    best_invariant_region,
    best_region_by_enumeration,
    block_of_region,
    discretize,
    exact_power_n1,
    invariant_power_range,
    np_region_discrete,
    region_discrepancy,
    region_on_grid,
    unit_grid,
)
from ..power.schemas import DuelReport
from ..power.service import CalibratedTest, duel, symmetric_power_gap
from ..statistics.schemas import QuadratureSpec
from ..statistics.service import (
    StatisticKind,
    TestStatistic,
    avg_lr_statistic,
    family_statistic,
    location_integrals,
    max_lr_statistic,
    scale_integrals,
)
from .schemas import Criterion, ExperimentConfig

logger = logging.getLogger(__name__)

POWER_COLUMNS = ["test", "alternative", "alpha", "critical_value", "p_hat", "std_error", "N", "seed"]
REGION_COLUMNS = ["test", "source", "lo", "hi"]
NOISE_SE = 3.0
INVARIANCE_PROBES = 10_000
GROUP_TOL = 1e-12
DYADIC = float(1 << 40)
FAMILY_TOL = 1e-8
CLOSED_FORM_INPUTS = 100
REGION_RESOLUTION = 1 << 20
MIXTURE_THETAS = (0.0, 0.25, 0.5, 0.75, 1.0)
# three whole orbits of the 8 x 8 grid; the next two orbits tie with each other
QUAD_ALPHA = 0.1875


@dataclass(frozen=True)
class RunContext:
    alpha: float
    n_calib: int
    n_power: int
    bank: SeedBank
    runner: MonteCarloRunner
    quad: QuadratureSpec


@dataclass(frozen=True)
class Problem:
    """One Monte Carlo comparison: a null, its alternatives and the statistics to calibrate."""

    name: str
    null: Density
    alternatives: tuple[Density, ...]
    statistics: tuple[TestStatistic, ...]
    pair: Optional[SymmetricPair] = None
    quad_problem: Optional[QuadAlternatives] = None
    group: Optional[GroupAction] = None


@dataclass
class ScenarioOutcome:
    tables: dict[str, tuple[list[dict[str, Any]], list[str]]] = field(default_factory=dict)
    records: dict[str, Any] = field(default_factory=dict)
    criteria: list[Criterion] = field(default_factory=list)

    def add_rows(self, table: str, rows: list[dict[str, Any]], columns: list[str]) -> None:
        existing, _ = self.tables.get(table, ([], columns))
        self.tables[table] = (existing + rows, columns)

    def check(self, name: str, passed: bool, value: Optional[float] = None, threshold: Optional[float] = None, detail: str = "") -> None:
        self.criteria.append(
            Criterion(
                name=name,
                passed=bool(passed),
                value=None if value is None else float(value),
                threshold=None if threshold is None else float(threshold),
                detail=detail,
            )
        )


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    alpha: float
    run: Callable[[RunContext], ScenarioOutcome]
    problems: Callable[[float, QuadratureSpec], list[Problem]]
    n_calib: Optional[int] = None
    n_power: Optional[int] = None


# Problem builders


def pair_problem(shape: Shape1D, n: int, weights=None) -> Problem:
    pair = make_symmetric_pair(shape, n)
    return Problem(
        name=f"{shape.name}-n{n}",
        null=pair.null,
        alternatives=pair.alternatives,
        statistics=(
            avg_lr_statistic(pair.null, pair.alternatives, weights),
            max_lr_statistic(pair.null, pair.alternatives),
        ),
        pair=pair,
        group=reflection_group(n),
    )


def quad_problem(f2_id: str = "quad-9x2y2") -> Problem:
    quad = make_quad_alternatives(resolve_bivariate(f2_id))
    return Problem(
        name=quad.f2.name,
        null=quad.null,
        alternatives=quad.alternatives,
        statistics=(avg_lr_statistic(quad.null, quad.alternatives), max_lr_statistic(quad.null, quad.alternatives)),
        quad_problem=quad,
        group=quad_reflection_group(),
    )


def family_problem(kind: str, f_id: str, g_id: str, n: int, quad: QuadratureSpec) -> Problem:
    f_base, g_base = resolve_base(f_id), resolve_base(g_id)
    if kind == "location":
        null, alt = LocationFamily(f_base, n), LocationFamily(g_base, n)
        kinds = (StatisticKind.INT_LOCATION_LR, StatisticKind.MAX_LOCATION_LR)
    else:
        null, alt = ScaleFamily(f_base, n), ScaleFamily(g_base, n)
        kinds = (StatisticKind.INT_SCALE_LR, StatisticKind.MAX_SCALE_LR)
    return Problem(
        name=f"{kind}-{f_id}-vs-{g_id}-n{n}",
        null=null,
        alternatives=(alt,),
        statistics=tuple(family_statistic(k, f_base, g_base, quad) for k in kinds),
    )


def _statistic_for(kind: str, null: Density, alternatives, weights, f_base=None, g_base=None, quad=None):
    if kind == StatisticKind.AVG_LR.value:
        return avg_lr_statistic(null, alternatives, weights)
    if kind == StatisticKind.MAX_LR.value:
        return max_lr_statistic(null, alternatives)
    return family_statistic(StatisticKind(kind), f_base, g_base, quad)


def build_problem(config: ExperimentConfig, quad: QuadratureSpec) -> Problem:
    """Problem described by an explicit (scenario-free) config."""
    kinds = config.statistics
    if config.problem == "symmetric-pair":
        pair = make_symmetric_pair(resolve_shape(config.shape), config.n)
        stats = tuple(_statistic_for(k, pair.null, pair.alternatives, config.weights) for k in kinds)
        return Problem(f"{config.shape}-n{config.n}", pair.null, pair.alternatives, stats, pair=pair, group=reflection_group(config.n))
    if config.problem == "quad-bivariate":
        base = quad_problem(config.bivariate or "quad-9x2y2")
        stats = tuple(_statistic_for(k, base.null, base.alternatives, config.weights) for k in kinds)
        return Problem(base.name, base.null, base.alternatives, stats, quad_problem=base.quad_problem, group=base.group)
    if config.problem == "alternatives":
        null = UniformDensity(config.n)
        alternatives = tuple(IidShapeDensity(resolve_shape(item), config.n) for item in config.alternatives)
        stats = tuple(_statistic_for(k, null, alternatives, config.weights) for k in kinds)
        return Problem("alternatives", null, alternatives, stats)
    if config.problem in ("location", "scale"):
        base = family_problem(config.problem, config.null, config.alternatives[0], config.n, quad)
        f_base, g_base = resolve_base(config.null), resolve_base(config.alternatives[0])
        stats = tuple(_statistic_for(k, base.null, base.alternatives, None, f_base, g_base, quad) for k in kinds)
        return Problem(base.name, base.null, base.alternatives, stats)
    raise ConfigError("config names neither a scenario nor a problem", ["set 'scenario' or 'problem'"])


# Shared checks


def power_rows(report: DuelReport) -> list[dict[str, Any]]:
    rows = []
    for row in report.alternatives:
        for summary, estimate in ((report.test_a, row.power_a), (report.test_b, row.power_b)):
            rows.append(
                {
                    "test": estimate.test,
                    "alternative": estimate.alternative,
                    "alpha": summary.alpha,
                    "critical_value": summary.critical_value,
                    "p_hat": estimate.p_hat,
                    "std_error": estimate.std_error,
                    "N": estimate.N,
                    "seed": estimate.seed,
                }
            )
    return rows


def run_duel(problem: Problem, ctx: RunContext, outcome: ScenarioOutcome, label: str = "") -> DuelReport:
    stat_a, stat_b = problem.statistics[:2]
    bank = ctx.bank.child(label) if label else ctx.bank
    report = duel(stat_a, stat_b, problem.null, problem.alternatives, ctx.alpha, ctx.n_calib, ctx.n_power, bank, ctx.runner)
    key = f"duel_{label}" if label else "duel"
    outcome.records[key] = report
    outcome.add_rows("power", power_rows(report), POWER_COLUMNS)
    prefix = f"{label}:" if label else ""
    for check in report.size_checks:
        outcome.check(
            f"{prefix}size[{check.test}]",
            check.within_3se,
            value=check.rate,
            threshold=NOISE_SE * check.combined_se,
            detail=f"attained size {check.attained_size:.6f}",
        )
    return report


def check_dominance(report: DuelReport, outcome: ScenarioOutcome, label: str = "") -> None:
    prefix = f"{label}:" if label else ""
    for row in report.alternatives:
        outcome.check(
            f"{prefix}dominance[{row.alternative}]",
            row.difference >= -NOISE_SE * row.paired_se,
            value=row.difference,
            threshold=-NOISE_SE * row.paired_se,
            detail=f"{report.test_a.statistic.identifier} - {report.test_b.statistic.identifier}",
        )


def check_verdicts(report: DuelReport, expected: str, outcome: ScenarioOutcome, label: str = "") -> None:
    prefix = f"{label}:" if label else ""
    for row in report.alternatives:
        outcome.check(f"{prefix}verdict[{row.alternative}]", row.verdict == expected, value=row.difference, detail=row.verdict)


def check_group_invariance(problem: Problem, bank: SeedBank, outcome: ScenarioOutcome, label: str = "") -> None:
    """Statistics equal at x and g(x) for every element, on a probe set."""
    group = problem.group
    raw = probe_points(group.dimension, INVARIANCE_PROBES, name=f"{bank.prefix}{label}invariance-probe")
    # multiples of 2^-40 keep 1 - x exact
    probes = np.clip(np.round(raw * DYADIC), 1.0, DYADIC - 1.0) / DYADIC
    prefix = f"{label}:" if label else ""
    for stat in problem.statistics:
        base = stat.evaluate(probes).values
        worst = 0.0
        for element in range(group.order):
            moved = stat.evaluate(apply(group, element, probes)).values
            worst = max(worst, float(np.max(np.abs(moved - base) / (1.0 + np.abs(base)))))
        outcome.check(f"{prefix}invariance[{stat.identifier}]", worst <= GROUP_TOL, value=worst, threshold=GROUP_TOL)


def _rebuilt(stat: TestStatistic, report: DuelReport, which: str) -> CalibratedTest:
    summary = report.test_a if which == "a" else report.test_b
    return CalibratedTest(
        statistic=stat,
        alpha=summary.alpha,
        critical_value=summary.critical_value,
        replicates=summary.replicates,
        seed=summary.seed,
        attained_size=summary.attained_size,
        failure_rate=summary.failure_rate,
    )


def check_n1_oracles(problem: Problem, report: DuelReport, ctx: RunContext, outcome: ScenarioOutcome) -> dict[str, float]:
    """Compare calibrated n = 1 regions and MC powers against the closed-form oracle."""
    shape = problem.pair.shape
    analytic = analytic_region_n1(shape, ctx.alpha)
    exact = {"max-lr": exact_power_n1(shape, analytic.max_lr), "avg-lr": exact_power_n1(shape, analytic.avg_lr)}
    outcome.records["analytic_regions"] = analytic
    rows = []
    calibration_sd = math.sqrt(ctx.alpha * (1.0 - ctx.alpha) / ctx.n_calib)
    f_sup = float(np.max(shape.pdf(unit_grid(4096)[:, 0])))
    grid = unit_grid(REGION_RESOLUTION)
    for stat, which, estimates in (
        (problem.statistics[0], "a", [row.power_a for row in report.alternatives]),
        (problem.statistics[1], "b", [row.power_b for row in report.alternatives]),
    ):
        test = _rebuilt(stat, report, which)
        kind = stat.kind.value
        reference = analytic.avg_lr if kind == "avg-lr" else analytic.max_lr
        calibrated = region_on_grid(test.decide(grid))
        for lo, hi in reference.intervals:
            rows.append({"test": kind, "source": "analytic", "lo": lo, "hi": hi})
        for lo, hi in calibrated.intervals:
            rows.append({"test": kind, "source": "calibrated", "lo": lo, "hi": hi})
        gap = region_discrepancy(reference, calibrated)
        outcome.check(f"region[{kind}]", gap <= NOISE_SE * calibration_sd + 4.0 / REGION_RESOLUTION, value=gap, threshold=NOISE_SE * calibration_sd)
        at_calibrated = exact_power_n1(shape, calibrated)
        outcome.check(
            f"calibrated-power[{kind}]",
            abs(at_calibrated - exact[kind]) <= NOISE_SE * f_sup * calibration_sd,
            value=at_calibrated - exact[kind],
            threshold=NOISE_SE * f_sup * calibration_sd,
        )
        for estimate in estimates:
            outcome.check(
                f"oracle[{kind}, {estimate.alternative}]",
                abs(estimate.p_hat - at_calibrated) <= NOISE_SE * estimate.std_error,
                value=estimate.p_hat - at_calibrated,
                threshold=NOISE_SE * estimate.std_error,
                detail=f"exact power {exact[kind]:.7f} at the analytic region",
            )
    outcome.add_rows("regions", rows, REGION_COLUMNS)
    outcome.records["exact_power"] = exact
    return exact


# Scenario runners


def _n1_runner(shape_factory: Callable[[], Shape1D], expected_verdict: str):
    def run(ctx: RunContext) -> ScenarioOutcome:
        outcome = ScenarioOutcome()
        problem = pair_problem(shape_factory(), 1)
        report = run_duel(problem, ctx, outcome)
        check_dominance(report, outcome)
        check_verdicts(report, expected_verdict, outcome)
        exact = check_n1_oracles(problem, report, ctx, outcome)
        if expected_verdict == "a_dominates":
            outcome.check("max-lr-below-alpha", exact["max-lr"] < ctx.alpha, value=exact["max-lr"], threshold=ctx.alpha)
        return outcome

    return run


def run_symmetric_n5(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    for shape in (convex_shape(), concave_shape()):
        problem = pair_problem(shape, 5)
        report = run_duel(problem, ctx, outcome, label=shape.name)
        check_dominance(report, outcome, label=shape.name)
        check_group_invariance(problem, ctx.bank, outcome, label=shape.name)
        for stat, which in zip(problem.statistics, "ab"):
            gap = symmetric_power_gap(
                _rebuilt(stat, report, which),
                problem.pair,
                ctx.n_power,
                ctx.bank.child(shape.name).substream(f"gap/{stat.identifier}"),
                ctx.runner,
            )
            outcome.records[f"gap_{shape.name}_{stat.identifier}"] = gap
            outcome.check(f"{shape.name}:symmetric-power[{stat.identifier}]", gap.within_3se, value=gap.difference, threshold=NOISE_SE * gap.paired_se)
    return outcome


def run_quad_bivariate(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    problem = quad_problem()
    report = run_duel(problem, ctx, outcome)
    check_dominance(report, outcome)
    perms = induced_permutations(problem.group, problem.alternatives)
    outcome.records["induced_permutations"] = [perm.record(problem.group) for perm in perms]
    outcome.check("transitive", is_transitive(perms, len(problem.alternatives)))
    outcome.check("composition-consistent", composition_consistent(problem.group, perms))
    check_group_invariance(problem, ctx.bank, outcome)
    return outcome


def _closed_form_normal(points: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    spread = np.sum((points - points.mean(axis=1, keepdims=True)) ** 2, axis=1)
    return -0.5 * (n - 1) * np.log(2 * np.pi) - 0.5 * np.log(n) - spread / 2.0


def _closed_form_exponential(points: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    return gammaln(n) - n * np.log(points.sum(axis=1))


def _closed_form_half_normal(points: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    q = np.sum(points**2, axis=1)
    return 0.5 * n * np.log(2.0 / np.pi) + np.log(0.5) + gammaln(n / 2.0) + 0.5 * n * np.log(2.0 / q)


def _relative_gap(log_numeric: np.ndarray, log_exact: np.ndarray) -> float:
    return float(np.max(np.abs(np.expm1(log_numeric - log_exact))))


def _family_invariance(problem: Problem, probes: np.ndarray, moved: np.ndarray, outcome: ScenarioOutcome, what: str) -> None:
    for stat in problem.statistics:
        before = stat.evaluate(probes)
        after = stat.evaluate(moved)
        worst = float(np.max(np.abs(after.values - before.values)))
        outcome.check(f"{what}-invariance[{stat.identifier}]", worst <= FAMILY_TOL, value=worst, threshold=FAMILY_TOL)


def run_location(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    problem = family_problem("location", "normal", "cauchy", 3, ctx.quad)
    report = run_duel(problem, ctx, outcome)
    check_dominance(report, outcome)

    rng = ctx.bank.substream("closed-form").generator()
    inputs = rng.normal(scale=2.0, size=(CLOSED_FORM_INPUTS, 3))
    numeric = location_integrals(inputs, normal_base(), ctx.quad)
    gap = _relative_gap(numeric.log_value, _closed_form_normal(inputs))
    outcome.check("closed-form[normal]", gap <= FAMILY_TOL and not numeric.failed.any(), value=gap, threshold=FAMILY_TOL)

    shifts = rng.uniform(-10.0, 10.0, size=(CLOSED_FORM_INPUTS, 1))
    _family_invariance(problem, inputs, inputs + shifts, outcome, "translation")
    return outcome


def run_scale(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    problem = family_problem("scale", "exponential", "half-normal", 3, ctx.quad)
    report = run_duel(problem, ctx, outcome)
    check_dominance(report, outcome)

    rng = ctx.bank.substream("closed-form").generator()
    inputs = rng.exponential(size=(CLOSED_FORM_INPUTS, 3))
    quad = ctx.quad.model_copy(update={"transform": "log-atan"})
    for base, closed in ((exponential_base(), _closed_form_exponential), (half_normal_base(), _closed_form_half_normal)):
        numeric = scale_integrals(inputs, base, quad)
        gap = _relative_gap(numeric.log_value, closed(inputs))
        outcome.check(f"closed-form[{base.name}]", gap <= FAMILY_TOL and not numeric.failed.any(), value=gap, threshold=FAMILY_TOL)

    factors = np.exp(rng.uniform(-2.0, 2.0, size=(CLOSED_FORM_INPUTS, 1)))
    _family_invariance(problem, inputs, inputs * factors, outcome, "scale")
    return outcome


def run_discrete_oracle(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    rows = []
    for shape in (convex_shape(), concave_shape()):
        dp = discretize(make_symmetric_pair(shape, 1), 10)
        for alpha in (0.2, 0.4):
            best = best_invariant_region(dp, alpha)
            mixture = np_region_discrete(dp.p0, dp.mixture, alpha)
            rows.append({"problem": shape.name, "alpha": alpha, "method": "best-invariant", "cells": " ".join(map(str, best.cells)), "power": best.power})
            rows.append({"problem": shape.name, "alpha": alpha, "method": "np-mixture", "cells": " ".join(map(str, mixture.cells)), "power": mixture.power})
            outcome.check(
                f"{shape.name}:mixture-np[alpha={alpha}]",
                best.cells == mixture.cells and bool(best.avg_lr_certified),
                value=best.power,
                detail=f"best {best.cells}, mixture NP {mixture.cells}",
            )

        power_range = invariant_power_range(dp, 0.2)
        outcome.records[f"power_range_{shape.name}"] = power_range
        regions = analytic_region_n1(shape, 0.2)
        max_blocks = block_of_region(dp, regions.max_lr)
        avg_blocks = block_of_region(dp, regions.avg_lr)
        if shape.curvature.value == "concave":
            outcome.check(f"{shape.name}:max-lr-minimizes", max_blocks == power_range.min_blocks, value=power_range.min_power, detail=f"max-lr blocks {max_blocks}")
            outcome.check(f"{shape.name}:avg-lr-maximizes", avg_blocks == power_range.max_blocks, value=power_range.max_power, detail=f"avg-lr blocks {avg_blocks}")
        else:
            outcome.check(f"{shape.name}:max-lr-maximizes", max_blocks == power_range.max_blocks, value=power_range.max_power, detail=f"max-lr blocks {max_blocks}")

        single = np_region_discrete(dp.p0, dp.alternatives[0], 0.2)
        brute = best_region_by_enumeration(dp.p0, dp.alternatives[0], 0.2)
        outcome.check(f"{shape.name}:np-optimal", abs(single.power - brute.power) <= 1e-12, value=single.power, threshold=brute.power)

    quad = discretize(make_quad_alternatives(), 8)
    best = best_invariant_region(quad, QUAD_ALPHA)
    mixture = np_region_discrete(quad.p0, quad.mixture, QUAD_ALPHA)
    rows.append({"problem": "quad-9x2y2", "alpha": QUAD_ALPHA, "method": "best-invariant", "cells": " ".join(map(str, best.cells)), "power": best.power})
    rows.append({"problem": "quad-9x2y2", "alpha": QUAD_ALPHA, "method": "np-mixture", "cells": " ".join(map(str, mixture.cells)), "power": mixture.power})
    outcome.check(f"quad-9x2y2:mixture-np[alpha={QUAD_ALPHA}]", best.cells == mixture.cells and bool(best.avg_lr_certified), value=best.power)
    outcome.add_rows("discrete", rows, ["problem", "alpha", "method", "cells", "power"])
    return outcome


def mixture_alternatives(pair: SymmetricPair) -> tuple[Density, ...]:
    return tuple(make_mixture([pair.p1, pair.p2], [theta, 1.0 - theta]) for theta in MIXTURE_THETAS)


def _mixture_problems(alpha: float, quad: QuadratureSpec) -> list[Problem]:
    base = pair_problem(concave_shape(), 1)
    return [
        Problem(
            name="concave-mixtures",
            null=base.null,
            alternatives=mixture_alternatives(base.pair),
            statistics=base.statistics,
            pair=base.pair,
            group=base.group,
        )
    ]


def run_mixture_sweep(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    report = run_duel(_mixture_problems(ctx.alpha, ctx.quad)[0], ctx, outcome)
    check_dominance(report, outcome)
    return outcome


def _increasing_problems(alpha: float, quad: QuadratureSpec) -> list[Problem]:
    null = UniformDensity(1)
    alternatives = (IidShapeDensity(convex_shape(), 1), IidShapeDensity(concave_shape(), 1))
    return [
        Problem(
            name="increasing-n1",
            null=null,
            alternatives=alternatives,
            statistics=(avg_lr_statistic(null, alternatives), max_lr_statistic(null, alternatives)),
        )
    ]


def run_increasing_n1(ctx: RunContext) -> ScenarioOutcome:
    outcome = ScenarioOutcome()
    report = run_duel(_increasing_problems(ctx.alpha, ctx.quad)[0], ctx, outcome)
    check_verdicts(report, "tie_within_noise", outcome)
    return outcome


SCENARIOS: dict[str, Scenario] = {
    scenario.id: scenario
    for scenario in (
        Scenario(
            "convex-n1",
            "avg-LR vs max-LR, f = 3x^2, n = 1: identical regions",
            0.1,
            _n1_runner(convex_shape, "tie_within_noise"),
            lambda alpha, quad: [pair_problem(convex_shape(), 1)],
        ),
        Scenario(
            "concave-n1",
            "avg-LR vs max-LR, f = 1.5 sqrt(x), n = 1: avg-LR dominates, max-LR power below alpha",
            0.1,
            _n1_runner(concave_shape, "a_dominates"),
            lambda alpha, quad: [pair_problem(concave_shape(), 1)],
        ),
        Scenario(
            "symmetric-n5",
            "avg-LR vs max-LR on both bundled shapes at n = 5",
            0.1,
            run_symmetric_n5,
            lambda alpha, quad: [pair_problem(convex_shape(), 5), pair_problem(concave_shape(), 5)],
        ),
        Scenario(
            "quad-bivariate",
            "four reflected alternatives of 9x^2y^2 on the unit square",
            0.1,
            run_quad_bivariate,
            lambda alpha, quad: [quad_problem()],
        ),
        Scenario(
            "location-normal-vs-cauchy",
            "integrated vs maximum LR, normal null vs Cauchy alternative location families, n = 3",
            0.05,
            run_location,
            lambda alpha, quad: [family_problem("location", "normal", "cauchy", 3, quad)],
            n_calib=200_000,
            n_power=200_000,
        ),
        Scenario(
            "scale-exp-vs-halfnormal",
            "integrated vs maximum LR, exponential null vs half-normal alternative scale families, n = 3",
            0.05,
            run_scale,
            lambda alpha, quad: [family_problem("scale", "exponential", "half-normal", 3, quad)],
            n_calib=200_000,
            n_power=200_000,
        ),
        Scenario(
            "discrete-oracle",
            "exhaustive invariant-region search against the mixture Neyman-Pearson region",
            0.2,
            run_discrete_oracle,
            lambda alpha, quad: [],
        ),
        Scenario(
            "mixture-sweep",
            "concave n = 1 pair against theta p1 + (1 - theta) p2",
            0.1,
            run_mixture_sweep,
            _mixture_problems,
        ),
        Scenario(
            "increasing-n1",
            "two increasing alternatives at n = 1: both tests reject for large x",
            0.1,
            run_increasing_n1,
            _increasing_problems,
        ),
    )
}


def get_scenario(scenario_id: str) -> Scenario:
    if scenario_id not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{scenario_id}'", [f"valid scenario ids: {', '.join(SCENARIOS)}"])
    return SCENARIOS[scenario_id]
