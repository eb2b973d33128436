"""Deterministic thread fan-out capped by the ``FHN_ATLAS_THREADS`` variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "FHN_ATLAS_THREADS"


def worker_count() -> int:
    """Number of worker threads; serial unless the environment asks for more."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def thread_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """``list(map(fn, items))`` with results always in input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
