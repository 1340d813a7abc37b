"""
Worker pool for independent trials.
"""
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Set
import asyncio
import logging

from .base import ExecutionContext, LabException, Plan, Resources, RunTimeoutError, Task, TrialError

TrialFn = Callable[[Task], Any]


class TrialCoordinator:
    """
    Runs the tasks of a plan on a bounded pool of worker threads.

    Results come back in task order whatever the completion order, so a
    report assembled from them is a deterministic reduction by trial index.
    """
    def __init__(self, resources: Optional[Resources] = None):
        self.resources = resources or Resources()
        self.logger = logging.getLogger(__name__)

    async def execute(self, plan: Plan, trial: TrialFn) -> List[Any]:
        """Run `trial` on every task of `plan`"""
        context = ExecutionContext(
            start_time=datetime.now(),
            resources=self.resources,
            metadata={"experiment": plan.experiment, "tasks": len(plan.tasks)}
        )
        self.logger.info(
            f"Running {len(plan.tasks)} {plan.experiment} trials on {context.resources.workers} workers"
        )
        semaphore = asyncio.Semaphore(context.resources.workers)

        async def run_one(task: Task) -> Any:
            async with semaphore:
                try:
                    return await asyncio.to_thread(trial, task)
                except LabException:
                    raise
                except Exception as e:
                    await self._handle_failure(task, e)

        if not plan.tasks:
            return []
        futures = [asyncio.ensure_future(run_one(task)) for task in plan.tasks]
        done, pending = await asyncio.wait(
            futures, timeout=context.resources.timeout, return_when=asyncio.FIRST_EXCEPTION
        )
        failed = [f for f in futures if f in done and not f.cancelled() and f.exception() is not None]
        if failed or pending:
            await self._abandon(plan, futures, pending, timed_out=not failed)
        if failed:
            raise failed[0].exception()
        return [f.result() for f in futures]

    async def _abandon(
        self, plan: Plan, futures: List[asyncio.Future], pending: Set[asyncio.Future], timed_out: bool
    ) -> None:
        """Cancel unfinished trials; a trial already in a worker thread is only released, not stopped"""
        abandoned = [task.id for task, f in zip(plan.tasks, futures) if f in pending]
        for f in pending:
            f.cancel()
        await asyncio.gather(*pending, return_exceptions=True)
        if not timed_out:
            return
        timeout = self.resources.timeout
        self.logger.error(
            f"{plan.experiment} exceeded {timeout}s; abandoned {len(abandoned)} trials: {', '.join(abandoned)}"
        )
        raise RunTimeoutError(timeout, abandoned)

    async def _handle_failure(self, task: Task, error: Exception) -> None:
        """Handle task execution failure"""
        self.logger.error(f"Task {task.id} failed: {str(error)}")
        raise TrialError(task.id, error) from error


class RunMonitor:
    """
    Records wall time per run.
    """
    def __init__(self):
        self.runs: Dict[str, List[float]] = {}
        self.logger = logging.getLogger(__name__)

    def record(self, experiment: str, context: ExecutionContext) -> float:
        duration = (datetime.now() - context.start_time).total_seconds()
        self.runs.setdefault(experiment, []).append(duration)
        self.logger.debug(f"{experiment} took {duration:.3f}s")
        return duration

    def get_metrics_summary(self) -> Dict[str, Any]:
        """Run counts and mean wall time per experiment"""
        return {
            experiment: {"runs": len(durations), "avg_wall_time_s": sum(durations) / len(durations)}
            for experiment, durations in self.runs.items()
        }
