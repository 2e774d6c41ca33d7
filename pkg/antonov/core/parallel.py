"""Thread-pool map for embarrassingly parallel numerical loops.

numpy/scipy kernels release the GIL, so threads are enough for the per-energy,
per-gamma and per-beta loops; inputs are immutable and shared freely.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Event
from typing import TypeVar

from antonov.core.errors import CancelledError

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class CancelToken:
    _event: Event = field(default_factory=Event)

    def cancel(self) -> None:
        self._event.set()

    def is_cancelled(self) -> bool:
        return self._event.is_set()

    def raise_if_cancelled(self) -> None:
        if self._event.is_set():
            raise CancelledError("Scan cancelled")


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    *,
    max_workers: int = 1,
    token: CancelToken | None = None,
    name: str = "map",
) -> list[R]:
    """Apply ``fn`` to every item, preserving order.

    ``max_workers <= 1`` runs inline. The first exception raised by a worker is
    re-raised after the pool shuts down.
    """
    seq: Sequence[T] = items if isinstance(items, Sequence) else list(items)

    def _call(item: T) -> R:
        if token is not None:
            token.raise_if_cancelled()
        return fn(item)

    if max_workers <= 1 or len(seq) <= 1:
        return [_call(item) for item in seq]

    workers = min(int(max_workers), len(seq))
    logger.debug("parallel %s over %d items with %d workers", name, len(seq), workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=name) as pool:
        return list(pool.map(_call, seq))
