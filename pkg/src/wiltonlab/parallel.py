"""Deterministic chunked parallelism.

Work is split into fixed-size index chunks regardless of the worker count;
every chunk derives its randomness from global sample indices and writes to
its own slice of a preallocated array.  Reductions then run over the full
array in a fixed order, so results are identical for any WILTON_THREADS.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

CHUNK = 16384


def thread_count() -> int:
    env = os.environ.get("WILTON_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_chunks(total: int, chunk_fn: Callable[[int, int], None], threads: int | None = None) -> None:
    """Run chunk_fn(i0, i1) over [0, total) in CHUNK-sized pieces."""
    if total <= 0:
        return
    ranges = [(i, min(i + CHUNK, total)) for i in range(0, total, CHUNK)]
    n_threads = thread_count() if threads is None else max(1, threads)
    if n_threads == 1 or len(ranges) == 1:
        for i0, i1 in ranges:
            chunk_fn(i0, i1)
        return
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        # list() propagates worker exceptions
        list(pool.map(lambda r: chunk_fn(*r), ranges))
