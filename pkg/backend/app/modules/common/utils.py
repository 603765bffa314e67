"""Common utilities shared across modules."""

import hashlib
from datetime import datetime, timezone

import numpy as np

from .errors import DensityError


def utcnow() -> datetime:
    """Return aware UTC timestamps to keep manifests consistent."""
    return datetime.now(timezone.utc)


def stable_key(name: str) -> int:
    """Map a name to a 64-bit integer that is identical across processes and runs."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def as_point(x, dim: int) -> np.ndarray:
    """Coerce one sample point to a float vector of length ``dim``."""
    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if point.ndim != 1 or point.shape[0] != dim:
        raise DensityError(f"point has shape {point.shape}, expected ({dim},)")
    if np.isnan(point).any():
        raise DensityError("point contains NaN")
    return point


def as_batch(x, dim: int) -> np.ndarray:
    """Coerce a batch of points to shape ``(N, dim)``; a single point becomes ``(1, dim)``."""
    batch = np.asarray(x, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch.reshape(1, -1) if dim > 1 or batch.size == 1 else batch.reshape(-1, 1)
    if batch.ndim != 2 or batch.shape[1] != dim:
        raise DensityError(f"batch has shape {batch.shape}, expected (N, {dim})")
    return batch
