"""
Worker pool for independent per-level computations.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from mzkit.core.config import settings
from mzkit.core.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Thread pool that falls back to inline execution for a single worker.

    Results always come back in input order, whatever the number of workers.
    """

    def __init__(self, threads: Optional[int] = None):
        self.threads = max(1, threads if threads is not None else settings.threads)
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "WorkerPool":
        if self.threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="mzkit")
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self._executor is None or len(items) <= 1:
            return [fn(item) for item in items]
        logger.debug("Dispatching tasks", tasks=len(items), threads=self.threads)
        return list(self._executor.map(fn, items))
