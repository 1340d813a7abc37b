"""
One experiment class per ExperimentConfig.experiment value.

An experiment turns a config into a Plan of independent trials, runs one
trial per Task (called from worker threads), and folds the ordered rows
into a report.
"""
from dataclasses import replace
from typing import Any, Callable, Dict, List, Type
import logging
import math

from .base import Plan, Task
from .config import ExperimentConfig
from .cvx_cx import gap_trial_2d
from .cvx_ulln import (
    ScenarioDistribution,
    eps_ulln_trial,
    median_example,
    summarize_convergence,
    two_atom_example,
    ulln_trial,
)
from .dyadic import (
    K_bound,
    derive_seed,
    exact_failure_probability,
    find_joint_one_bit,
    joint_failure_bound,
    shatter_witness,
    spawn_streams,
    verify_shattering,
)
from .lip_cx import gap_trial
from .reports import (
    ConvergenceReport,
    ExperimentReport,
    GadgetReport,
    GadgetTrial,
    GapReport,
    ShatterReport,
    ShatterRow,
    summarize_gaps,
)

DISTRIBUTION_FACTORIES: Dict[str, Callable[[], ScenarioDistribution]] = {
    "median": median_example,
    "two-atom": two_atom_example,
}


class BaseExperiment:
    """Plan, trial, summary and report type for one experiment"""
    name: str = ""
    report_type: Type[ExperimentReport] = ExperimentReport

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)

    def plan(self) -> Plan:
        """One task per trial; trial t gets sub-seed derive_seed(seed, t)"""
        tasks = [
            Task(id=f"{self.name}-{t}", index=t, seed=derive_seed(self.config.seed, t))
            for t in range(self.config.trials)
        ]
        return Plan(experiment=self.name, tasks=tasks)

    def trial(self, task: Task) -> Any:
        raise NotImplementedError

    def rows(self, results: List[Any]) -> List[Any]:
        return results

    def summarize(self, rows: List[Any]) -> Dict[str, Any]:
        raise NotImplementedError

    def build_report(self, results: List[Any], wall_time_s: float = 0.0) -> ExperimentReport:
        rows = self.rows(results)
        self.logger.debug(f"{self.name}: folding {len(rows)} rows into a {self.report_type.__name__}")
        return self.report_type(
            experiment=self.name,
            config=self.config.to_dict(),
            rows=rows,
            summary=self.summarize(rows),
            wall_time_s=wall_time_s,
        )


class GapLipExperiment(BaseExperiment):
    """Gap at p_{k^nu} for the random 1-Lipschitz family"""
    name = "gap-lip"
    report_type = GapReport

    def trial(self, task: Task):
        capacity = self.config.capacity
        streams = spawn_streams(task.seed, self.config.nu, capacity.max_bits)
        record = gap_trial(streams, task.seed, capacity, truncation_tol=self.config.tol)
        return replace(record, trial=task.index)

    def summarize(self, rows):
        return summarize_gaps(rows)


class GapCvxExperiment(GapLipExperiment):
    """Gap at p_{k^nu} for the random convex family in the plane"""
    name = "gap-cvx"

    def trial(self, task: Task):
        capacity = self.config.capacity
        streams = spawn_streams(task.seed, self.config.nu, capacity.max_bits)
        return replace(gap_trial_2d(streams, task.seed, capacity), trial=task.index)


class GadgetStatsExperiment(BaseExperiment):
    """Failure frequency of the joint-bit event finder"""
    name = "gadget-stats"
    report_type = GadgetReport

    def trial(self, task: Task) -> GadgetTrial:
        nu = self.config.nu
        capacity = self.config.capacity
        K = K_bound(nu, capacity)
        k = find_joint_one_bit(spawn_streams(task.seed, nu, capacity.max_bits), K)
        return GadgetTrial(seed=task.seed, nu=nu, K=K, found=k is not None, k=k, trial=task.index)

    def summarize(self, rows):
        nu = self.config.nu
        bound = joint_failure_bound(nu)
        failures = sum(1 for row in rows if not row.found)
        threshold = float(bound) + 3 * math.sqrt(float(bound) / len(rows))
        fraction = failures / len(rows)
        return {
            "nu": nu,
            "K": K_bound(nu, self.config.capacity),
            "trials": len(rows),
            "failures": failures,
            "failure_fraction": fraction,
            "failure_bound": bound,
            "exact_failure_probability": exact_failure_probability(nu, self.config.capacity),
            "threshold_3sigma": threshold,
            "within_threshold": fraction <= threshold,
        }


class ShatterExperiment(BaseExperiment):
    """Shattering witness for width n with its verification table"""
    name = "shatter"
    report_type = ShatterReport

    def plan(self) -> Plan:
        return Plan(experiment=self.name, tasks=[Task(id=f"{self.name}-0", index=0, seed=self.config.seed)])

    def trial(self, task: Task):
        witness = shatter_witness(self.config.n, self.config.capacity)
        return witness, verify_shattering(witness)

    def rows(self, results):
        _, realized = results[0]
        return [
            ShatterRow(pattern="".join(str(bit) for bit in pattern), k=k)
            for pattern, k in realized.items()
        ]

    def build_report(self, results, wall_time_s: float = 0.0) -> ExperimentReport:
        report = super().build_report(results, wall_time_s)
        witness, _ = results[0]
        report.summary["witnesses"] = [str(xi) for xi in witness]
        report.summary["witness_values"] = [xi.as_fraction() for xi in witness]
        return report

    def summarize(self, rows):
        return {
            "n": self.config.n,
            "patterns": len(rows),
            "all_patterns_realized": all(row.k is not None for row in rows),
        }


class UllnExperiment(BaseExperiment):
    """sup_x gap between expected and empirical subdifferentials across nu"""
    name = "ulln-1d"
    report_type = ConvergenceReport

    def __init__(self, config: ExperimentConfig):
        super().__init__(config)
        self.distribution = DISTRIBUTION_FACTORIES[config.resolved_distribution]()

    def plan(self) -> Plan:
        """Trial t uses the same sub-seed for every nu, so samples are nested across nu"""
        tasks = []
        for nu in self.config.nu_list:
            for t in range(self.config.trials):
                index = len(tasks)
                tasks.append(Task(
                    id=f"{self.name}-{index}", index=index, seed=derive_seed(self.config.seed, t), data={"nu": nu}
                ))
        return Plan(experiment=self.name, tasks=tasks)

    def trial(self, task: Task):
        row = ulln_trial(self.distribution, task.data["nu"], task.seed)
        return replace(row, trial=task.index)

    def summarize(self, rows):
        summary = summarize_convergence(rows)
        summary["distribution"] = self.distribution.name
        return summary


class EpsUllnExperiment(UllnExperiment):
    """Fixed-epsilon law on a breakpoint-refined grid"""
    name = "eps-ulln"

    def trial(self, task: Task):
        row = eps_ulln_trial(
            self.distribution,
            self.config.epsilon,
            task.data["nu"],
            task.seed,
            grid_points=self.config.grid_points,
        )
        return replace(row, trial=task.index)

    def summarize(self, rows):
        summary = super().summarize(rows)
        summary["epsilon"] = self.config.epsilon
        return summary


EXPERIMENT_TYPES: Dict[str, Type[BaseExperiment]] = {
    cls.name: cls
    for cls in (
        GapLipExperiment,
        GapCvxExperiment,
        GadgetStatsExperiment,
        ShatterExperiment,
        UllnExperiment,
        EpsUllnExperiment,
    )
}


def get_experiment(config: ExperimentConfig) -> BaseExperiment:
    return EXPERIMENT_TYPES[config.experiment](config)
