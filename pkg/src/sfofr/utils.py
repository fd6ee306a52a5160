import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterator, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def float_array(values) -> np.ndarray:
    """Convert input to a float64 ndarray (used as an attrs converter)."""
    return np.asarray(values, dtype=np.float64)


def spawn_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a generator keyed by (seed, *stream).

    Streams are derived from the full key rather than drawn in sequence, so a
    replicate's draws do not depend on how many replicates ran before it.
    """
    return np.random.default_rng([int(seed), *(int(s) for s in stream)])


def resolve_jobs(jobs: int) -> int:
    """Translate a --jobs value into a worker count (<= 0 means all cores)."""
    if jobs is None or jobs <= 0:
        return os.cpu_count() or 1
    return int(jobs)


def parallel_map(
    func: Callable[[T], R], items: Sequence[T], jobs: int = 1
) -> List[R]:
    """Apply func to every item, optionally on a thread pool.

    Results come back in input order whatever the scheduling. numpy and scipy
    release the GIL inside BLAS/LAPACK, so threads give real concurrency for
    the dense linear algebra that dominates each task.

    Args:
        func: Callable applied to each item
        items: Items to process
        jobs: Number of worker threads (1 runs inline)
    """
    items = list(items)
    workers = min(resolve_jobs(jobs), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


@contextmanager
def stopwatch() -> Iterator[List[float]]:
    """Measure wall-clock seconds of a block; the elapsed time lands in result[0]."""
    result = [0.0]
    start = time.perf_counter()
    try:
        yield result
    finally:
        result[0] = time.perf_counter() - start

