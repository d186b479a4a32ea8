"""
Stage timing for long running commands.

Each stage logs its start and elapsed time and stores the timing so that it
ends up in the run manifest.
"""
import time
import logging
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

logger = logging.getLogger(__name__)


class StageTimer:
    """
    Records wall-clock seconds per named stage.

    Usage:
        timer = StageTimer()
        with timer.stage("matrix"):
            ...
        timer.timings  # {"matrix": 1.23}
    """

    def __init__(self, timings: Optional[Dict[str, float]] = None):
        self.timings: Dict[str, float] = timings if timings is not None else {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start_time = time.time()
        logger.info(f"Stage: {name} - started")
        try:
            yield
        finally:
            process_time = time.time() - start_time
            self.timings[name] = self.timings.get(name, 0.0) + process_time
            logger.info(f"Stage: {name} - Time: {process_time:.3f}s")

    def total(self) -> float:
        return sum(self.timings.values())
