"""
Scheduler module for noma-lab
Dispatches independent sweep points to a thread pool and collects results in sweep order
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

from config.settings import settings

logger = logging.getLogger(__name__)


class SweepScheduler:
    """Runs one task per sweep point, in parallel, keeping results in input order"""

    def __init__(self, task_function: Callable[[Any], Any], threads: Optional[int] = None):
        """
        Initialize scheduler

        Args:
            task_function: Function evaluated once per sweep point
            threads: Worker cap. If None, uses NOMA_LAB_THREADS from settings.
        """
        self.task_function = task_function
        self.threads = max(1, threads if threads is not None else settings.THREADS)
        self.failures = 0

    def _create_task_wrapper(self, index: int, total: int):
        """
        Create a wrapper that logs the point and turns failures into None

        Returns:
            Wrapper function executing the task for one point
        """
        def wrapper(point):
            try:
                logger.debug(f"Sweep point {index + 1}/{total}: {point}")
                return self.task_function(point)
            except Exception as e:
                logger.error(f"Sweep point {index + 1}/{total} ({point}) failed: {str(e)}")
                logger.debug("Sweep point traceback:", exc_info=True)
                return None
        return wrapper

    def run(self, points: Sequence[Any]) -> List[Any]:
        """
        Evaluate every point

        Returns:
            Results in the order of ``points``; None where the task raised
        """
        start_time = time.time()
        total = len(points)
        logger.info(f"Running {total} sweep point(s) on {min(self.threads, max(total, 1))} worker(s)")

        if self.threads == 1 or total <= 1:
            results = [self._create_task_wrapper(i, total)(point) for i, point in enumerate(points)]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                futures = [executor.submit(self._create_task_wrapper(i, total), point)
                           for i, point in enumerate(points)]
                results = [future.result() for future in futures]

        self.failures = sum(1 for result in results if result is None)
        if self.failures:
            logger.warning(f"{self.failures} of {total} sweep point(s) failed")
        logger.info(f"Sweep finished in {time.time() - start_time:.2f} seconds")
        return results


def create_scheduler(task_function: Callable[[Any], Any], threads: Optional[int] = None) -> SweepScheduler:
    """
    Create and configure a scheduler

    Args:
        task_function: Function to execute per sweep point

    Returns:
        Configured SweepScheduler instance
    """
    return SweepScheduler(task_function, threads)
