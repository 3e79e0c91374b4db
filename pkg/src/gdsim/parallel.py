"""Thread-count configuration and an order-preserving parallel map."""

import os
from concurrent.futures import ThreadPoolExecutor

_threads = None


def default_threads():
    env = os.environ.get("GDSIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def get_threads():
    return _threads if _threads is not None else default_threads()


def set_threads(n):
    global _threads
    if n is not None and n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = n


def chunks(n, parts):
    """Split ``range(n)`` into at most ``parts`` contiguous ``(start, stop)`` blocks."""
    parts = max(1, min(parts, n))
    bounds = [round(n * p / parts) for p in range(parts + 1)]
    return [(bounds[p], bounds[p + 1]) for p in range(parts) if bounds[p] < bounds[p + 1]]


def pmap(fn, items, threads=None):
    """Apply ``fn`` to every item, returning results in input order.

    Results never depend on the thread count: each call is independent and
    any reduction happens afterwards, in item order.
    """
    items = list(items)
    threads = get_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
