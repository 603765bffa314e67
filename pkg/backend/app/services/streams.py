"""Seed discipline and chunked Monte Carlo execution.

A master seed derives named substreams (calibration, power per alternative,
probes). Every substream is split into fixed-size chunks and chunk ``i`` always
draws from the counter-based generator keyed by ``(master seed, name, i)``, so
results do not depend on how many workers execute the chunks.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Callable, TypeVar

import numpy as np

from ..modules.common.errors import ConfigError
from ..modules.common.utils import stable_key

logger = logging.getLogger(__name__)

T = TypeVar("T")

U64 = 2**64


@dataclass(frozen=True)
class Substream:
    master_seed: int
    name: str

    @property
    def key(self) -> int:
        return stable_key(self.name)

    def seed_sequence(self, chunk: int = 0) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.key, chunk))

    def generator(self, chunk: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed_sequence(chunk)))

    def seed_words(self) -> list[int]:
        """First 64-bit state words of chunk 0, recorded in run manifests."""
        return [int(word) for word in self.seed_sequence(0).generate_state(2, dtype=np.uint64)]


@dataclass(frozen=True)
class SeedBank:
    """Derives named substreams from one master seed and remembers every name it issued."""

    master_seed: int
    prefix: str = ""
    issued: list[str] = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < U64:
            raise ConfigError("seed out of range", [f"seed must be an unsigned 64-bit value, got {self.master_seed}"])

    def substream(self, name: str) -> Substream:
        full = f"{self.prefix}{name}"
        if full not in self.issued:
            self.issued.append(full)
        return Substream(self.master_seed, full)

    def child(self, prefix: str) -> "SeedBank":
        return SeedBank(self.master_seed, f"{self.prefix}{prefix}/", self.issued)

    def seed_table(self) -> dict[str, list[int]]:
        return {name: Substream(self.master_seed, name).seed_words() for name in sorted(self.issued)}


def chunk_plan(total: int, chunk_size: int) -> list[tuple[int, int]]:
    """Split ``total`` replicates into ``(chunk index, count)`` pairs."""
    plan = []
    start = 0
    index = 0
    while start < total:
        count = min(chunk_size, total - start)
        plan.append((index, count))
        start += count
        index += 1
    return plan


class MonteCarloRunner:
    """Runs a chunk task over a substream, serially or on a process pool."""

    def __init__(self, workers: int = 1, chunk_size: int = 65_536) -> None:
        if workers < 1:
            raise ConfigError("invalid worker count", [f"workers must be >= 1, got {workers}"])
        self.workers = workers
        self.chunk_size = chunk_size

    def map_chunks(self, task: Callable[[Substream, int, int], T], stream: Substream, total: int) -> list[T]:
        plan = chunk_plan(total, self.chunk_size)
        indices = [index for index, _ in plan]
        counts = [count for _, count in plan]
        logger.debug("substream %s: %d replicates in %d chunks", stream.name, total, len(plan))
        if self.workers == 1 or len(plan) == 1:
            return [task(stream, index, count) for index, count in plan]
        with ProcessPoolExecutor(max_workers=min(self.workers, len(plan))) as pool:
            return list(pool.map(task, repeat(stream), indices, counts))
