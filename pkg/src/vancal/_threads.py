"""Worker-count cap and scheduling-independent reductions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence


def max_workers() -> int:
    """Parallelism cap from VANCAL_THREADS (>= 1); results never depend on it."""
    raw = os.environ.get("VANCAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn: Callable, items: Sequence) -> list:
    """Map preserving input order, threaded when VANCAL_THREADS > 1."""
    workers = max_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def pairwise_sum(values: Iterable[float]) -> float:
    """Fixed pairwise tree reduction; independent of worker scheduling."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        vals = [
            vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
            for i in range(0, len(vals), 2)
        ]
    return vals[0]
