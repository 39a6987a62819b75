"""Fan dump files out to worker processes that share one read-only lookup structure."""

from __future__ import annotations

import multiprocessing
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

T = TypeVar("T")

_shared: Any = None


def _init(shared: Any) -> None:
    global _shared
    _shared = shared


def _call(fn: Callable[[Any, Any], T], unit: Any) -> T:
    return fn(unit, _shared)


def map_units(fn: Callable[[Any, Any], T], units: Sequence[Any], shared: Any, shards: int = 1) -> list[T]:
    """``[fn(unit, shared) for unit in units]``, spread over ``shards`` processes.

    Results come back in ``units`` order whatever the shard count. With the fork
    start method ``shared`` is inherited copy-on-write, not pickled per task.
    """
    if shards <= 1 or len(units) <= 1:
        return [fn(unit, shared) for unit in units]
    methods = multiprocessing.get_all_start_methods()
    ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
    with ProcessPoolExecutor(max_workers=min(shards, len(units)), mp_context=ctx,
                             initializer=_init, initargs=(shared,)) as pool:
        return list(pool.map(_call, [fn] * len(units), units))
