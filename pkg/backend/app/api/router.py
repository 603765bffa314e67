"""Aggregated command parser mounting every module's routes."""

import argparse

from ..modules.reports.router import register as register_reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lr-lab",
        description="Calibrate and compare maximum, average and integrated likelihood-ratio tests.",
    )
    parser.add_argument("--log-level", dest="log_level", help="override LR_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_reports(subparsers)
    return parser
