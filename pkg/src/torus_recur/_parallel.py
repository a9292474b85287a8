"""Deterministic chunked parallelism.

Work is cut into a fixed number of chunks that does not depend on the
worker count; each chunk gets its own child of a master ``SeedSequence``
and partial results are combined in chunk order.  Outputs are therefore
identical for any value of ``TORUS_RECUR_THREADS``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "TORUS_RECUR_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            v = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
        if v < 1:
            raise ValueError(f"{ENV_THREADS} must be >= 1")
        return v
    return max(1, min(8, os.cpu_count() or 1))


def map_ordered(fn, items):
    """``[fn(x) for x in items]`` evaluated on a thread pool, order preserved."""
    items = list(items)
    w = min(worker_count(), len(items))
    if w <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


def split_counts(total: int, chunk: int) -> list[int]:
    """Chunk sizes summing to ``total``; the split depends only on ``total`` and ``chunk``."""
    if total < 0 or chunk < 1:
        raise ValueError("bad chunking")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def seeded_chunks(seed: int, total: int, chunk: int):
    """Pairs ``(size, Generator)`` with one independent child stream per chunk."""
    sizes = split_counts(total, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(n, np.random.default_rng(c)) for n, c in zip(sizes, children)]
