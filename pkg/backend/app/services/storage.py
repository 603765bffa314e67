"""Result persistence: JSON records, CSV tables, config hashing and run manifests."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"

Payload = Union[BaseModel, Mapping[str, Any], Sequence[Any]]


def _plain(payload: Payload) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    if isinstance(payload, Mapping):
        return {key: _plain(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_plain(item) for item in payload]
    return payload


def canonical_json(payload: Payload) -> str:
    return json.dumps(_plain(payload), sort_keys=True, separators=(",", ":"))


def config_hash(payload: Payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def write_json(path: Path, payload: Payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(payload), indent=2) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def write_csv(path: Path, rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> Path:
    """Write rows with a fixed column order and 9 significant digits."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path
