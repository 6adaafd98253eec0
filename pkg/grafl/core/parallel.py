# grafl/core/parallel.py
"""Worker-count resolution and chunked joblib maps."""
from __future__ import annotations

import os
from typing import Any, Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from grafl.config import get_settings


def resolve_workers(requested: Optional[int] = None) -> int:
    """GRAFL_WORKERS wins over the requested value; both fall back to 1."""
    env = get_settings().WORKERS
    workers = env if env is not None else requested
    if workers is None:
        return 1
    workers = int(workers)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return max(1, workers)


def chunk_ranges(size: int, workers: int, min_chunk: int = 256) -> list[tuple[int, int]]:
    """Contiguous [lo, hi) ranges; order of results follows order of ranges."""
    if size <= 0:
        return []
    parts = max(1, min(workers * 4, -(-size // min_chunk)))
    bounds = np.linspace(0, size, parts + 1).astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def parallel_map(
    fn: Callable[..., Any],
    items: Sequence[Any],
    workers: int = 1,
    prefer: str = "threads",
    args: tuple = (),
) -> list[Any]:
    """``[fn(item, *args) for item in items]`` run on joblib workers, order preserved."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item, *args) for item in items]
    return Parallel(n_jobs=workers, prefer=prefer)(delayed(fn)(item, *args) for item in items)
