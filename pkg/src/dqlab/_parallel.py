"""Deterministic chunked Monte Carlo execution.

Work is split into fixed-size chunks; chunk ``k`` draws from
``SeedSequence(seed, spawn_key=(k,))`` so results do not depend on how many
workers run the chunks. Partial results are reduced in chunk order.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

T = TypeVar("T")

CHUNK_SIZE = 8192


def chunk_sizes(n: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def map_chunks(
    fn: Callable[[np.random.Generator, int], T], n: int, seed: int, workers: int = 1, chunk: int = CHUNK_SIZE
) -> list[T]:
    """Run ``fn(rng, size)`` over all chunks and return results in chunk order."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(chunk_rng(seed, k), size) for k, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
