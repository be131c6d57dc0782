"""Order-preserving map over worker processes.

Work is always split into the same chunks whatever the worker count, so
results reduce identically for ``workers=1`` and ``workers=k``.
"""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor

CHUNK = 50


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def chunks(total: int, size: int = CHUNK) -> list[range]:
    return [range(i, min(i + size, total)) for i in range(0, total, size)]


def pmap(fn, items, workers: int = 1):
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1 or multiprocessing.current_process().daemon:
        return [fn(x) for x in items]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, len(items)), mp_context=ctx) as ex:
        return list(ex.map(fn, items))
