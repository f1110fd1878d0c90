"""Order-preserving parallel map used by the sweep and grid engines."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def ordered_map(fn, items, threads: int | None = None, chunksize: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over worker processes.

    Results come back in input order whatever the completion order, so the
    output does not depend on ``threads``. ``fn`` must be picklable (a
    module-level function or a ``functools.partial`` of one).
    """
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
