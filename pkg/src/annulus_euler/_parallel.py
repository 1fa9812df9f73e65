import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "ANNULUS_EULER_THREADS"


def worker_count():
    """Data-parallel width from ``ANNULUS_EULER_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, n)


def ordered_map(func, items, width=None):
    """``list(map(func, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    width = worker_count() if width is None else width
    if width <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(width, len(items))) as pool:
        return list(pool.map(func, items))
