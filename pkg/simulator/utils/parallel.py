"""
Deterministic chunked execution.

Work is cut into chunks whose layout depends only on the problem, never on
the number of workers; chunk results are combined in chunk order, so a run
gives the same bytes with one worker or eight.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 1024


def compensated_sum(values: Iterable[complex]) -> complex:
    """Error-free accumulation of real and imaginary parts (math.fsum)."""
    array = np.asarray(list(values) if not isinstance(values, np.ndarray) else values).ravel()
    if array.size == 0:
        return 0j
    return complex(math.fsum(np.real(array).tolist()), math.fsum(np.imag(array).tolist()))


def chunk_ranges(total: int, chunk_size: int = DEFAULT_CHUNK) -> List[range]:
    return [range(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def run_chunks(func: Callable[[Any], Any], chunks: Sequence[Any], workers: int = 1) -> List[Any]:
    """
    Apply func to every chunk, serially or on a process pool, keeping chunk order.

    Args:
        func: Picklable callable applied to each chunk
        chunks: Work items
        workers: Number of processes (1 runs inline)

    Returns:
        Results in the order of chunks
    """
    if workers <= 1 or len(chunks) <= 1:
        return [func(chunk) for chunk in chunks]
    logger.debug(f"Running {len(chunks)} chunks on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, chunks))
