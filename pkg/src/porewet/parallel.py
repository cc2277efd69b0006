"""Thread-pool helpers. POREWET_THREADS caps worker count; 0 or unset
means one worker per CPU. Results always come back in input order, so
threading never changes output."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ParameterError

ENV_VAR = "POREWET_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw in ("", "0"):
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParameterError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ParameterError(f"{ENV_VAR} must be >= 0, got {n}")
    return max(n, 1)


def map_ordered(fn, items, workers: int | None = None) -> list:
    """Apply fn to every item, preserving order; serial when one worker."""
    items = list(items)
    workers = thread_count() if workers is None else max(int(workers), 1)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
