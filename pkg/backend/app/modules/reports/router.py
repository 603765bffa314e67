"""Command-line routes: each subcommand parses its flags and calls one service."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Callable, Optional

from ...config import get_settings
from ...schemas import MessageResponse
from ..common.errors import ConfigError
from ..densities.registry import FAMILY_IDS
from . import service
from .scenarios import SCENARIOS
from .schemas import ExperimentConfig

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace], MessageResponse]


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit value")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _bounds(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bounds must look like LO,HI, got {text}") from exc
    if not lo < hi:
        raise argparse.ArgumentTypeError("lower bound must be below the upper bound")
    return lo, hi


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--scenario", help=f"bundled scenario ({', '.join(SCENARIOS)})")
    parser.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    parser.add_argument("--alpha", type=float, help="nominal level in (0, 1)")
    parser.add_argument("--n-calib", dest="n_calib", type=int, help="null replicates for calibration")
    parser.add_argument("--n-power", dest="n_power", type=int, help="replicates per alternative")
    parser.add_argument("--out", dest="output_dir", type=Path, help="output directory")
    parser.add_argument("--workers", type=_positive, help="worker processes; never changes results")


def _resolved(args: argparse.Namespace) -> service.ResolvedRun:
    config = service.load_config(args.config) if args.config else ExperimentConfig()
    overrides: dict[str, Any] = {
        "scenario": args.scenario,
        "seed": args.seed,
        "alpha": args.alpha,
        "n_calib": args.n_calib,
        "n_power": args.n_power,
        "output_dir": args.output_dir,
    }
    config = service.merge_overrides(config, overrides)
    return service.resolve_run(config, workers=args.workers)


def calibrate_command(args: argparse.Namespace) -> MessageResponse:
    run = _resolved(args)
    payload = service.cmd_calibrate(run)
    return MessageResponse(message=f"calibrated {len(payload['tests'])} tests into {run.output_dir}")


def duel_command(args: argparse.Namespace) -> MessageResponse:
    run = _resolved(args)
    payload = service.cmd_duel(run)
    verdicts = [
        f"{name}/{row.alternative}: {row.verdict}" for name, report in payload["duels"].items() for row in report.alternatives
    ]
    return MessageResponse(message="; ".join(verdicts))


def reproduce_command(args: argparse.Namespace) -> MessageResponse:
    run = _resolved(args)
    summary = service.cmd_reproduce(run)
    return MessageResponse(message=f"{summary.scenario}: {len(summary.criteria)} criteria passed")


def figure1_command(args: argparse.Namespace) -> MessageResponse:
    config = service.load_config(args.config) if args.config else ExperimentConfig()
    config = service.merge_overrides(
        config,
        {"alpha": args.alpha, "output_dir": args.output_dir, "f_shape": args.f_shape, "g_shape": args.g_shape},
    )
    run = service.resolve_run(config)
    service.cmd_figure1(run)
    return MessageResponse(message=f"figure data written to {run.output_dir}")


def verify_density_command(args: argparse.Namespace) -> MessageResponse:
    if args.family not in FAMILY_IDS:
        raise ConfigError(f"unknown family '{args.family}'", [f"valid family ids: {', '.join(FAMILY_IDS)}"])
    output_dir: Optional[Path] = args.output_dir or get_settings().output_dir
    report = service.cmd_verify_density(
        args.family,
        output_dir,
        bounds=args.bounds,
        ks_draws=args.ks_draws,
        seed=args.seed,
    )
    return MessageResponse(message=f"{report.density}: integral {report.integral:.12g} ({report.status})")


def register(subparsers: argparse._SubParsersAction) -> None:
    calibrate = subparsers.add_parser("calibrate", help="calibrate critical values under the null")
    _add_run_flags(calibrate)
    calibrate.set_defaults(handler=calibrate_command)

    duel = subparsers.add_parser("duel", help="compare two calibrated tests on shared draws")
    _add_run_flags(duel)
    duel.set_defaults(handler=duel_command)

    reproduce = subparsers.add_parser("reproduce", help="run a bundled scenario and check its criteria")
    _add_run_flags(reproduce)
    reproduce.set_defaults(handler=reproduce_command)

    figure1 = subparsers.add_parser("figure1", help="emit f, g and both statistics on a grid, plus regions")
    figure1.add_argument("--config", type=Path)
    figure1.add_argument("--alpha", type=float)
    figure1.add_argument("--f-shape", dest="f_shape", help="shape id for f (default convex-3x2)")
    figure1.add_argument("--g-shape", dest="g_shape", help="shape id for g, or 'reflect' for f(1 - x)")
    figure1.add_argument("--out", dest="output_dir", type=Path)
    figure1.set_defaults(handler=figure1_command)

    verify = subparsers.add_parser("verify-density", help="check normalization and sampler of a registered family")
    verify.add_argument("--family", required=True, help=f"family id ({', '.join(FAMILY_IDS)})")
    verify.add_argument("--bounds", type=_bounds, action="append", help="truncation LO,HI; repeat per coordinate")
    verify.add_argument("--ks-draws", dest="ks_draws", type=int, default=100_000)
    verify.add_argument("--seed", type=_u64)
    verify.add_argument("--out", dest="output_dir", type=Path)
    verify.set_defaults(handler=verify_density_command)
