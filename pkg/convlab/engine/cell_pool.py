"""
Cell Pool

Evaluates independent (object, n) cells of a check. Results come back in
submission order so every reduction over them is deterministic.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from convlab.config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class CellPool:
    """Thread pool sized by CONVLAB_THREADS (default: machine parallelism)."""

    def __init__(self, threads: Optional[int] = None):
        self._threads = threads

    @property
    def workers(self) -> int:
        threads = self._threads or config.THREADS or os.cpu_count() or 1
        return max(1, int(threads))

    def map(self, fn: Callable[[T], R], cells: Sequence[T]) -> List[R]:
        cells = list(cells)
        if self.workers == 1 or len(cells) < 2:
            return [fn(c) for c in cells]
        logger.debug("evaluating %d cells on %d threads", len(cells), self.workers)
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, cells))


# Global pool instance
cell_pool = CellPool()
