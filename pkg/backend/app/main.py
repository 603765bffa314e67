"""Command-line entrypoint: logging setup, dispatch and exit codes."""

from __future__ import annotations

import logging
import sys
from typing import Optional, Sequence

from .api.router import build_parser
from .config import Settings, get_settings
from .modules.common.errors import ExitCode, LabError
from .schemas import ErrorResponse

logger = logging.getLogger("app")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(settings: Settings, level: Optional[str] = None) -> None:
    """One stderr handler; DEBUG whenever settings.debug is on."""
    chosen = "DEBUG" if settings.debug else (level or settings.log_level).upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(chosen)


def _report(exc: LabError) -> None:
    payload = ErrorResponse(exit_code=int(exc.exit_code), **exc.payload())
    print(payload.model_dump_json(exclude_none=True), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(settings, args.log_level)
    try:
        response = args.handler(args)
    except LabError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        _report(exc)
        return int(exc.exit_code)
    print(response.message)
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(main())
