from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Iterator, Optional
import logging

from core.config import DEFAULT_JOBS

logger = logging.getLogger(__name__)


@contextmanager
def get_worker_pool(jobs: Optional[int] = None) -> Iterator[Optional[ProcessPoolExecutor]]:
    """
    Dependency to get a worker pool for independent pair computations.

    Args:
        jobs (int, optional): Number of worker processes. Defaults to DEFAULT_JOBS.

    Yields:
        ProcessPoolExecutor or None: None means "run in the calling process".
    """
    workers = jobs if jobs is not None else DEFAULT_JOBS
    if workers <= 1:
        yield None
        return
    pool = ProcessPoolExecutor(max_workers=workers)
    logger.debug(f"Started worker pool with {workers} processes")
    try:
        yield pool
    finally:
        pool.shutdown()
