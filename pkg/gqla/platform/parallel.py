"""Process pool helpers.

Work items are independent and results come back in submission order, so
outputs never depend on the worker count.
"""

import logging
import os
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, TypeVar

from typing_extensions import override

from gqla.core import GqlaError

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


class SerialExecutor(Executor):
    """Executor running every call inline."""

    @override
    def submit(self, fn: Callable[..., R], /, *args: Any, **kwargs: Any) -> Future[R]:
        future: Future[R] = Future()
        try:
            future.set_result(fn(*args, **kwargs))
        except BaseException as e:
            future.set_exception(e)
        return future


def resolve_workers(workers: int | None) -> int:
    """Map a `--workers` value to a process count; 0 or None means all CPUs."""
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise GqlaError("config", f"--workers must be non-negative, got {workers}.")
    return workers


@contextmanager
def worker_pool(workers: int | None) -> Iterator[Executor]:
    """Get a process pool, or an inline executor for a single worker."""
    count = resolve_workers(workers)
    if count <= 1:
        yield SerialExecutor()
        return
    logger.debug("Starting a pool of %d processes.", count)
    with ProcessPoolExecutor(max_workers=count) as executor:
        yield executor


def parallel_map(
    fn: Callable[[T], R], items: Sequence[T], workers: int | None = 1
) -> list[R]:
    """Apply a picklable `fn` to every item, in order."""
    count = min(resolve_workers(workers), max(len(items), 1))
    with worker_pool(count) as executor:
        return list(executor.map(fn, items))
