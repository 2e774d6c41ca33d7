from __future__ import annotations

import threading

import pytest

from antonov.core.errors import CancelledError, SolverError
from antonov.core.parallel import CancelToken, parallel_map


@pytest.mark.parametrize("workers", [1, 4])
def test_order_is_preserved(workers: int) -> None:
    assert parallel_map(lambda x: x * x, range(20), max_workers=workers) == [x * x for x in range(20)]


def test_threads_are_used() -> None:
    seen: set[str] = set()

    def work(x: int) -> int:
        seen.add(threading.current_thread().name)
        return x

    parallel_map(work, list(range(16)), max_workers=4, name="scan")
    assert all(name.startswith("scan") for name in seen)


def test_cancelled_token_stops_the_map() -> None:
    token = CancelToken()
    token.cancel()
    assert token.is_cancelled()
    with pytest.raises(CancelledError, match="Scan cancelled"):
        parallel_map(lambda x: x, [1, 2, 3], token=token)


def test_cancel_mid_way() -> None:
    token = CancelToken()
    done: list[int] = []

    def work(x: int) -> int:
        done.append(x)
        if x == 2:
            token.cancel()
        return x

    with pytest.raises(CancelledError):
        parallel_map(work, range(6), token=token)
    assert done == [0, 1, 2]


def test_worker_errors_propagate() -> None:
    def work(x: int) -> int:
        if x == 3:
            raise SolverError("singular")
        return x

    with pytest.raises(SolverError, match="singular"):
        parallel_map(work, range(8), max_workers=3)
