"""
Main interface for the subdiff-lab experiment runner.
"""
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

from .core.base import ExecutionContext, LabException, Resources
from .core.config import ConfigIssue, ExperimentConfig, require_valid, validate
from .core.coordinator import RunMonitor, TrialCoordinator
from .core.experiments import get_experiment
from .core.reports import ExperimentReport, ReportWriter


class SubdiffLab:
    """
    Main interface for running experiments.

    This class provides a high-level API for:
    - Config validation
    - Running an experiment on the worker pool
    - Writing reports
    - Run monitoring
    """

    def __init__(self, log_level: str = "INFO", timeout: Optional[float] = None):
        """
        Initialize the lab.

        Args:
            log_level: Root logging level. Defaults to INFO
            timeout: Optional per-run timeout in seconds
        """
        self.logger = logging.getLogger(__name__)
        self._setup_logging(log_level)

        self.timeout = timeout
        self.writer = ReportWriter()
        self.monitor = RunMonitor()

        self.logger.debug("subdiff-lab initialized")

    def _setup_logging(self, log_level: str):
        """Setup logging configuration"""
        logging.basicConfig(
            level=getattr(logging, log_level.upper(), logging.INFO),
            format='%(asctime)s [%(levelname)8s] %(message)s (%(filename)s:%(lineno)d)'
        )

    def validate(self, config: ExperimentConfig) -> List[ConfigIssue]:
        """Every violation in `config`; empty when it is ready to run."""
        return validate(config)

    async def run(self, config: ExperimentConfig) -> ExperimentReport:
        """
        Run an experiment and write its report when `config.out` is set.

        Args:
            config: Experiment configuration

        Returns:
            The assembled report (rows ordered by trial index)

        Raises:
            ConfigError: invalid config (carries every issue)
            CapacityError: a size limit was hit while running, or RunTimeoutError
                when the run outlived `timeout`
            TrialError: a trial failed unexpectedly
            OSError: the report path is not writable
        """
        require_valid(config)
        experiment = get_experiment(config)
        context = ExecutionContext(
            start_time=datetime.now(),
            resources=Resources(workers=config.workers, timeout=self.timeout),
            metadata={"experiment": config.experiment}
        )
        try:
            self.logger.info(f"Starting {config.experiment} (seed={config.seed}, trials={config.trials})")
            coordinator = TrialCoordinator(context.resources)
            plan = experiment.plan()
            results = await coordinator.execute(plan, experiment.trial)
            wall_time = self.monitor.record(config.experiment, context)
            report = experiment.build_report(results, wall_time_s=wall_time)

        except LabException as e:
            self.logger.error(f"Error running {config.experiment}: {str(e)}")
            raise

        if config.out is not None:
            await self.writer.write(report, Path(config.out), config.format)
        self.logger.info(f"Finished {config.experiment} in {report.wall_time_s:.2f}s")
        return report

    def render(self, report: ExperimentReport, fmt: str = "json") -> str:
        return self.writer.render(report, fmt)

    def get_system_metrics(self) -> Dict[str, Any]:
        """
        Get run metrics.

        Returns:
            Dict of run counts and mean wall time per experiment
        """
        return self.monitor.get_metrics_summary()


async def create_lab(log_level: str = "INFO", timeout: Optional[float] = None) -> SubdiffLab:
    """
    Factory function to create a lab.

    Args:
        log_level: Root logging level
        timeout: Optional per-run timeout in seconds

    Returns:
        Initialized SubdiffLab instance
    """
    return SubdiffLab(log_level=log_level, timeout=timeout)
