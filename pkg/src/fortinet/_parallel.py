"""Worker-count handling with determinism by construction.

Work is split at fixed chunk boundaries that never depend on the worker
count, so any parallelism level produces byte-identical results; threads
only change scheduling. FORTINET_THREADS picks the worker count, default
machine parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

THREADS_ENV = "FORTINET_THREADS"

T = TypeVar("T")


def env_thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(
            f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        ) from exc
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be at least 1")
    return value


def resolve_threads(threads: int | None) -> int:
    return env_thread_count() if threads is None else max(1, int(threads))


def run_spans(
    fn: Callable[[int, int], T], total: int, chunk: int, threads: int | None = None
) -> list[T]:
    """Apply fn(lo, hi) over [0, total) in fixed chunks; results in order."""
    workers = resolve_threads(threads)
    spans = [(lo, min(total, lo + chunk)) for lo in range(0, total, chunk)]
    if workers <= 1 or len(spans) <= 1:
        return [fn(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda span: fn(*span), spans))


def run_items(
    fn: Callable[[T], object], items: Sequence[T], threads: int | None = None
) -> list[object]:
    """Apply fn to each item; result order follows the input order."""
    workers = resolve_threads(threads)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
