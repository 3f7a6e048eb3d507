"""Worker-pool helper honoring the APERTURE_FORGE_THREADS cap (0 = auto)."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("APERTURE_FORGE_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    auto = os.cpu_count() or 1
    return auto if cap <= 0 else min(cap, auto)


def parallel_map(fn, items):
    """Order-preserving map over items, threaded when it pays off.

    Work items must be pure (they are in this package), so threading never
    changes results, only wall-clock time.
    """
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
