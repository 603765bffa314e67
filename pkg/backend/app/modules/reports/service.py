"""Command implementations: resolve settings, run experiments, persist results.

Precedence for every knob is CLI flag > config file > scenario default >
settings. Every file except ``manifest.json`` is a pure function of the
resolved config and the master seed.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ... import __version__
from ...config import Settings, get_settings
from ...services import storage
from ...services.streams import MonteCarloRunner, SeedBank
from ..common.errors import ConfigError, CriterionFailure
from ..common.utils import utcnow
from ..densities.registry import (
    BIVARIATE,
    FAMILY_IDS,
    LOCATION_BASES,
    SCALE_BASES,
    SHAPES,
    resolve_base,
    resolve_bivariate,
    resolve_shape,
)
from ..densities.schemas import DensityVerification
from ..densities.service import (
    Density,
    IidShapeDensity,
    LocationFamily,
    QuadDensity,
    ScaleFamily,
    UniformDensity,
    verify_density,
)
from ..densities.shapes import Shape1D
from ..power.oracles import grid_region, region_on_grid, unit_grid
from ..power.service import calibrate, duel
from ..statistics.schemas import QuadratureSpec
from ..statistics.service import avg_lr_statistic, max_lr_statistic
from .scenarios import POWER_COLUMNS, SCENARIOS, Problem, RunContext, build_problem, get_scenario, power_rows
from .schemas import ExperimentConfig, RunManifest, ScenarioSummary

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05
FIGURE_ALPHA = 0.1
FIGURE_POINTS = 1000
REGION_RESOLUTION = 1 << 20
TAIL_MASS = 1e-9
FIGURE_COLUMNS = ["x", "f", "g", "max_lr", "avg_lr"]
FIGURE_REGION_COLUMNS = ["test", "lo", "hi"]


@dataclass(frozen=True)
class ResolvedRun:
    """Every value an experiment depends on, after applying the precedence rules."""

    config: ExperimentConfig
    alpha: float
    n_calib: int
    n_power: int
    seed: int
    quad: QuadratureSpec
    output_dir: Path
    workers: int
    chunk_size: int

    def identity(self, command: str) -> dict[str, Any]:
        """Hashed inputs; output directory and worker count never change results."""
        payload = self.config.model_dump(mode="json", exclude={"output_dir"})
        payload.update(
            command=command,
            alpha=self.alpha,
            n_calib=self.n_calib,
            n_power=self.n_power,
            seed=self.seed,
            quadrature=self.quad.model_dump(mode="json"),
            chunk_size=self.chunk_size,
        )
        return payload

    def context(self, bank: SeedBank) -> RunContext:
        return RunContext(
            alpha=self.alpha,
            n_calib=self.n_calib,
            n_power=self.n_power,
            bank=bank,
            runner=MonteCarloRunner(self.workers, self.chunk_size),
            quad=self.quad,
        )


def _error_line(text: str, key: str) -> Optional[int]:
    for number, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return number
    return None


def _validation_messages(exc: ValidationError, text: str = "") -> list[str]:
    messages = []
    for error in exc.errors():
        location = [str(part) for part in error["loc"]]
        where = ".".join(location) or "config"
        line = _error_line(text, location[0]) if text and location else None
        prefix = f"line {line}: " if line else ""
        messages.append(f"{prefix}{where}: {error['msg']}")
    return messages


def load_config(path: Path) -> ExperimentConfig:
    """Parse and validate a JSON experiment config; errors carry line numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}", [str(exc)]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON", [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}", _validation_messages(exc, text)) from exc


def merge_overrides(config: ExperimentConfig, overrides: dict[str, Any]) -> ExperimentConfig:
    """Apply CLI flags (non-None values only) and validate the result again."""
    data = config.model_dump(exclude_unset=True)
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("invalid command-line options", _validation_messages(exc)) from exc


def resolve_run(config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[Settings] = None) -> ResolvedRun:
    settings = settings or get_settings()
    scenario = get_scenario(config.scenario) if config.scenario else None
    alpha = config.alpha or (scenario.alpha if scenario else DEFAULT_ALPHA)
    n_calib = config.n_calib or (scenario.n_calib if scenario and scenario.n_calib else settings.n_calib)
    n_power = config.n_power or (scenario.n_power if scenario and scenario.n_power else settings.n_power)
    overrides = config.quadrature
    quad = QuadratureSpec(
        abs_tol=(overrides and overrides.abs_tol) or settings.quad_abs_tol,
        rel_tol=(overrides and overrides.rel_tol) or settings.quad_rel_tol,
        max_subdivisions=(overrides and overrides.max_subdivisions) or settings.quad_max_subdivisions,
    )
    return ResolvedRun(
        config=config,
        alpha=alpha,
        n_calib=n_calib,
        n_power=n_power,
        seed=config.seed if config.seed is not None else settings.master_seed,
        quad=quad,
        output_dir=Path(config.output_dir or settings.output_dir),
        workers=workers or settings.workers,
        chunk_size=settings.chunk_size,
    )


def _problems(run: ResolvedRun) -> list[Problem]:
    config = run.config
    if config.scenario:
        problems = get_scenario(config.scenario).problems(run.alpha, run.quad)
        if not problems:
            raise ConfigError(f"scenario '{config.scenario}' has no Monte Carlo problem", ["use the reproduce command"])
        return problems
    if config.problem is None:
        raise ConfigError("config names neither a scenario nor a problem", [f"valid scenario ids: {', '.join(SCENARIOS)}"])
    return [build_problem(config, run.quad)]


def _bank_for(bank: SeedBank, problems: Sequence[Problem], problem: Problem) -> SeedBank:
    return bank.child(problem.name) if len(problems) > 1 else bank


def _write_manifest(
    run: ResolvedRun, command: str, bank: SeedBank, outputs: list[Path], started: float
) -> Path:
    manifest = RunManifest(
        command=command,
        scenario=run.config.scenario,
        config_hash=storage.config_hash(run.identity(command)),
        version=__version__,
        timestamp=utcnow().isoformat(),
        master_seed=run.seed,
        substreams=bank.seed_table(),
        outputs=sorted(path.name for path in outputs),
        duration_seconds=round(time.perf_counter() - started, 3),
    )
    return storage.write_json(run.output_dir / "manifest.json", manifest)


def cmd_calibrate(run: ResolvedRun) -> dict[str, Any]:
    """Calibrate every statistic of every problem; 1-D problems also report their region."""
    started = time.perf_counter()
    bank = SeedBank(run.seed)
    runner = MonteCarloRunner(run.workers, run.chunk_size)
    problems = _problems(run)
    records = []
    for problem in problems:
        stream = _bank_for(bank, problems, problem).substream("calibration")
        for stat in problem.statistics:
            test = calibrate(stat, problem.null, run.alpha, run.n_calib, stream, runner)
            record: dict[str, Any] = {"problem": problem.name, "calibration": test.summary()}
            if problem.null.space.n == 1 and problem.null.space.bounded:
                region = region_on_grid(test.decide(unit_grid(REGION_RESOLUTION)))
                record["region"] = region.intervals
            records.append(record)
    payload = {"config_hash": storage.config_hash(run.identity("calibrate")), "tests": records}
    outputs = [storage.write_json(run.output_dir / "calibration.json", payload)]
    _write_manifest(run, "calibrate", bank, outputs, started)
    return payload


def cmd_duel(run: ResolvedRun) -> dict[str, Any]:
    """Calibrate the first two statistics on shared draws and compare their power."""
    started = time.perf_counter()
    bank = SeedBank(run.seed)
    runner = MonteCarloRunner(run.workers, run.chunk_size)
    problems = _problems(run)
    reports = {}
    rows = []
    for problem in problems:
        if len(problem.statistics) < 2:
            raise ConfigError("a duel needs two statistics", [f"problem {problem.name} has {len(problem.statistics)}"])
        stat_a, stat_b = problem.statistics[:2]
        report = duel(
            stat_a,
            stat_b,
            problem.null,
            problem.alternatives,
            run.alpha,
            run.n_calib,
            run.n_power,
            _bank_for(bank, problems, problem),
            runner,
        )
        reports[problem.name] = report
        rows.extend(power_rows(report))
    payload = {"config_hash": storage.config_hash(run.identity("duel")), "duels": reports}
    outputs = [
        storage.write_json(run.output_dir / "duel.json", payload),
        storage.write_csv(run.output_dir / "duel.csv", rows, POWER_COLUMNS),
    ]
    _write_manifest(run, "duel", bank, outputs, started)
    return payload


def cmd_reproduce(run: ResolvedRun) -> ScenarioSummary:
    """Run one bundled scenario, write its tables and summary, fail on any criterion."""
    if not run.config.scenario:
        raise ConfigError("reproduce needs a scenario", [f"valid scenario ids: {', '.join(SCENARIOS)}"])
    scenario = get_scenario(run.config.scenario)
    started = time.perf_counter()
    bank = SeedBank(run.seed)
    logger.info("reproducing %s: %s", scenario.id, scenario.description)
    outcome = scenario.run(run.context(bank))

    outputs = []
    for name, (rows, columns) in sorted(outcome.tables.items()):
        outputs.append(storage.write_csv(run.output_dir / f"{name}.csv", rows, columns))
    records = dict(outcome.records, config_hash=storage.config_hash(run.identity("reproduce")))
    outputs.append(storage.write_json(run.output_dir / "records.json", records))
    passed = all(criterion.passed for criterion in outcome.criteria)
    summary = ScenarioSummary(scenario=scenario.id, passed=passed, criteria=outcome.criteria)
    outputs.append(storage.write_json(run.output_dir / "summary.json", summary))
    _write_manifest(run, "reproduce", bank, outputs, started)

    for criterion in outcome.criteria:
        log = logger.info if criterion.passed else logger.error
        log("%s %s: value=%s threshold=%s %s", "PASS" if criterion.passed else "FAIL", criterion.name, criterion.value, criterion.threshold, criterion.detail)
    if not passed:
        failed = [criterion.name for criterion in outcome.criteria if not criterion.passed]
        raise CriterionFailure(f"{scenario.id}: {len(failed)} criteria failed", failed)
    return summary


def _figure_shape(shape_id: Optional[str], f_shape: Shape1D) -> tuple[IidShapeDensity, str]:
    if shape_id in (None, "reflect"):
        return IidShapeDensity(f_shape, 1, reflected=True), "reflect"
    return IidShapeDensity(resolve_shape(shape_id), 1), shape_id


def cmd_figure1(run: ResolvedRun) -> dict[str, Any]:
    """Curves of f, g and both statistics on the 1000-point midpoint grid, plus both rejection regions."""
    started = time.perf_counter()
    config = run.config
    alpha = config.alpha or FIGURE_ALPHA
    f_shape = resolve_shape(config.f_shape)
    f_density = IidShapeDensity(f_shape, 1)
    g_density, g_id = _figure_shape(config.g_shape, f_shape)
    null = UniformDensity(1)
    stats = {
        "max_lr": max_lr_statistic(null, (f_density, g_density)),
        "avg_lr": avg_lr_statistic(null, (f_density, g_density)),
    }

    x = unit_grid(FIGURE_POINTS)
    table = {
        "x": x[:, 0],
        "f": np.exp(f_density.log_pdf(x)),
        "g": np.exp(g_density.log_pdf(x)),
    }
    for column, stat in stats.items():
        # the CSV reports likelihood ratios, not their logs
        table[column] = np.exp(stat.evaluate(x).values)
    rows = [dict(zip(FIGURE_COLUMNS, values)) for values in zip(*(table[c] for c in FIGURE_COLUMNS))]

    region_rows = []
    thresholds = {}
    for column, stat in stats.items():
        threshold, region = grid_region(stat, alpha, REGION_RESOLUTION)
        thresholds[column] = threshold
        region_rows.extend({"test": column, "lo": lo, "hi": hi} for lo, hi in region.intervals)

    endpoints = np.array([[0.0], [1.0]])
    meta = {
        "alpha": alpha,
        "f_shape": config.f_shape,
        "g_shape": g_id,
        "grid_points": FIGURE_POINTS,
        "region_resolution": REGION_RESOLUTION,
        "log_thresholds": thresholds,
        "f_endpoints": [float(v) for v in np.exp(f_density.log_pdf(endpoints))],
        "g_endpoints": [float(v) for v in np.exp(g_density.log_pdf(endpoints))],
        "config_hash": storage.config_hash(run.identity("figure1")),
    }
    outputs = [
        storage.write_csv(run.output_dir / "figure1.csv", rows, FIGURE_COLUMNS),
        storage.write_csv(run.output_dir / "figure1_regions.csv", region_rows, FIGURE_REGION_COLUMNS),
        storage.write_json(run.output_dir / "figure1_meta.json", meta),
    ]
    _write_manifest(run, "figure1", SeedBank(run.seed), outputs, started)
    return meta


def density_for(family_id: str) -> Density:
    """A one-observation density (two for bivariate families) for a registered family id."""
    if family_id in SHAPES:
        return IidShapeDensity(resolve_shape(family_id), 1)
    if family_id in BIVARIATE:
        return QuadDensity(resolve_bivariate(family_id))
    if family_id in LOCATION_BASES:
        return LocationFamily(resolve_base(family_id), 1)
    if family_id in SCALE_BASES:
        return ScaleFamily(resolve_base(family_id), 1)
    raise ConfigError(f"unknown family '{family_id}'", [f"valid family ids: {', '.join(FAMILY_IDS)}"])


def default_bounds(density: Density) -> Optional[list[tuple[float, float]]]:
    """Truncation for unbounded families: quantiles leaving TAIL_MASS outside."""
    if density.space.bounded:
        return None
    base = density.base
    lo = 0.0 if base.support == "positive" else float(base.ppf(TAIL_MASS / 2))
    hi = float(base.ppf(1.0 - TAIL_MASS / 2))
    return [(lo, hi)]


def cmd_verify_density(
    family_id: str,
    output_dir: Path,
    bounds: Optional[list[tuple[float, float]]] = None,
    ks_draws: int = 100_000,
    seed: Optional[int] = None,
) -> DensityVerification:
    density = density_for(family_id)
    report = verify_density(
        density,
        bounds=bounds or default_bounds(density),
        ks_draws=ks_draws,
        seed=get_settings().master_seed if seed is None else seed,
    )
    storage.write_json(Path(output_dir) / "verify_density.json", report)
    if not report.passed:
        raise CriterionFailure(
            f"{report.density}: integral {report.integral:.12g} ({report.status})",
            [f"verify-density[{family_id}]"],
        )
    logger.info("%s: integral %.12g, KS %s", report.density, report.integral, report.ks_statistic)
    return report
