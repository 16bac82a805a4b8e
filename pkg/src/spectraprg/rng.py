"""Reproducible random streams for chunked, multi-threaded Monte Carlo.

Every chunk of an experiment gets its own counter-based Philox stream
keyed by ``splitmix64(master_seed, chunk_index)``, so results do not
depend on how chunks are scheduled across threads. Sub-seeds for named
parts of an experiment come from hashing a text label.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.special import ndtri

MASK64 = (1 << 64) - 1
T = TypeVar("T")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def chunk_key(master_seed: int, chunk_index: int) -> int:
    return splitmix64(splitmix64(master_seed & MASK64) ^ (chunk_index & MASK64))


def chunk_rng(master_seed: int, chunk_index: int) -> np.random.Generator:
    """Philox stream for one chunk."""
    return np.random.Generator(np.random.Philox(key=chunk_key(master_seed, chunk_index)))


def derive_seed(master_seed: int, label: str) -> int:
    """64-bit sub-seed for a labelled component of an experiment."""
    h = hashlib.blake2b(f"{master_seed}:{label}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniforms on the open interval (0, 1) from 53-bit integers."""
    raw = rng.integers(0, 1 << 53, size=shape, dtype=np.int64)
    return (raw.astype(np.float64) + 0.5) * 2.0**-53


def gaussians(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normals by inverse CDF of the chunk's uniforms."""
    return ndtri(open_uniform(rng, shape))


def signs(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform ``+-1`` as float64."""
    return 1.0 - 2.0 * rng.integers(0, 2, size=shape, dtype=np.int8).astype(np.float64)


def worker_count() -> int:
    env = os.environ.get("SPECTRA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


def chunk_sizes(total: int, chunk_size: int) -> list[int]:
    if total <= 0:
        return []
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[np.random.Generator, int, int], T], total: int, chunk_size: int,
               master_seed: int, workers: int | None = None) -> list[T]:
    """Run ``fn(rng, size, chunk_index)`` over all chunks; results in chunk order."""
    sizes = chunk_sizes(total, chunk_size)
    workers = workers or worker_count()
    tasks = [(chunk_rng(master_seed, i), s, i) for i, s in enumerate(sizes)]
    if workers == 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def ordered_sum(values: Sequence[float]) -> float:
    """Correctly rounded sum, independent of how the values were produced."""
    return math.fsum(values)
