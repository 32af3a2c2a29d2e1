"""Define the ExperimentCoordinator class."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional

from .config import ExperimentConfig
from .exceptions import ConfigError, GsvdError, NumericalFailure
from .experiments import EXPERIMENTS_BY_KEY, ExperimentDescription, Row, Task

_LOGGER = logging.getLogger(__name__)


class ExperimentCoordinator:
    """Coordinator that plans an experiment and runs its tasks.

    Tasks run in a thread pool; rows are re-assembled in task order, so the
    output does not depend on the number of workers.
    """

    def __init__(self, cfg: ExperimentConfig, max_workers: Optional[int] = None) -> None:
        """Initialize the coordinator.

        Args:
            cfg: Validated experiment configuration
            max_workers: Thread count; cfg.workers or the CPU count when None
        """
        self.cfg = cfg
        self.description: ExperimentDescription = EXPERIMENTS_BY_KEY[cfg.experiment]
        self.max_workers = max_workers or cfg.workers or (os.cpu_count() or 1)
        self.task_count = 0
        self.row_count = 0
        self.failed_tasks: list[str] = []
        self.elapsed: Optional[float] = None

    @property
    def columns(self) -> tuple[str, ...]:
        """Return the output columns of this run."""
        return self.description.columns_for(self.cfg)

    def _run_task(self, task: Task) -> list[Row]:
        _LOGGER.debug("Running task %s", task.label)
        return task.run()

    def run(self) -> list[Row]:
        """Plan and execute the experiment.

        Returns:
            list[Row]: Rows in deterministic task order

        Raises:
            ConfigError: If planning or a task rejects its parameters
            NumericalFailure: If any task fails numerically
        """
        start = time.perf_counter()
        _LOGGER.info(
            "Planning experiment %s (%d seeds)", self.cfg.experiment, len(self.cfg.seeds)
        )
        tasks = self.description.planner(self.cfg)
        self.task_count = len(tasks)
        _LOGGER.info("Running %d tasks on %d workers", len(tasks), self.max_workers)

        if self.max_workers == 1:
            outcomes = [self._guarded(task) for task in tasks]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                outcomes = list(executor.map(self._guarded, tasks))

        rows: list[Row] = []
        first_error: Optional[BaseException] = None
        for task, (task_rows, error) in zip(tasks, outcomes):
            if error is not None:
                self.failed_tasks.append(task.label)
                first_error = first_error or error
                continue
            rows.extend(task_rows)

        self.elapsed = time.perf_counter() - start
        if first_error is not None:
            if isinstance(first_error, ConfigError):
                raise first_error
            raise NumericalFailure(
                f"{len(self.failed_tasks)} of {len(tasks)} tasks failed; "
                f"first: {self.failed_tasks[0]}: {first_error}"
            ) from first_error

        self.row_count = len(rows)
        _LOGGER.info(
            "Experiment %s finished: %d rows in %.2f s",
            self.cfg.experiment,
            len(rows),
            self.elapsed,
        )
        return rows

    def _guarded(self, task: Task) -> tuple[list[Row], Optional[BaseException]]:
        try:
            return self._run_task(task), None
        except GsvdError as err:
            _LOGGER.error("Task %s failed: %s", task.label, err)
            return [], err

    def summary(self) -> dict[str, Any]:
        """Return counters describing the last run."""
        return {
            "experiment": self.cfg.experiment,
            "tasks": self.task_count,
            "rows": self.row_count,
            "failed_tasks": list(self.failed_tasks),
        }
