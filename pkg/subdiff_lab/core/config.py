"""
Experiment configuration and its validation.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional
import os

from .base import CapacityError, ConfigError
from .dyadic import Capacity, DEFAULT_CAPACITY, K_bound

EXPERIMENTS = ("gap-lip", "gap-cvx", "ulln-1d", "eps-ulln", "gadget-stats", "shatter")
FORMATS = ("json", "csv")
DISTRIBUTIONS = {"median": "continuous-uniform", "two-atom": "discrete"}
DEFAULT_DISTRIBUTION = {"ulln-1d": "median", "eps-ulln": "two-atom"}

ENV_SEED = "SUBDIFF_LAB_SEED"
ENV_WORKERS = "SUBDIFF_LAB_WORKERS"

_NU_EXPERIMENTS = ("gap-lip", "gap-cvx", "gadget-stats")
_NU_LIST_EXPERIMENTS = ("ulln-1d", "eps-ulln")


@dataclass(frozen=True)
class ConfigIssue:
    """One validation failure; kind is "config" or "capacity"."""
    field: str
    message: str
    kind: str = "config"

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run"""
    experiment: str
    nu: Optional[int] = None
    nu_list: Optional[List[int]] = None
    trials: int = 1
    seed: int = 0
    tol: float = 1e-6
    epsilon: Optional[float] = None
    out: Optional[str] = None
    format: str = "json"
    n: Optional[int] = None
    distribution: Optional[str] = None
    grid_points: int = 2001
    workers: int = 1
    capacity: Capacity = field(default_factory=lambda: DEFAULT_CAPACITY)

    @property
    def resolved_distribution(self) -> Optional[str]:
        return self.distribution or DEFAULT_DISTRIBUTION.get(self.experiment)

    def to_dict(self) -> Dict[str, Any]:
        """Config echo for reports; `workers` and `out` do not affect results and are left out"""
        data = asdict(self)
        data.pop("workers")
        data.pop("out")
        data["distribution"] = self.resolved_distribution
        return data


def env_default(name: str, fallback: int) -> int:
    """Integer from the environment, or `fallback` when unset"""
    raw = os.getenv(name)
    if raw is None or raw == "":
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise ConfigError([ConfigIssue(name, f"environment value {raw!r} is not an integer")])


def _positive(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


def _check_nu(nu: Any, field_name: str, capacity: Capacity, issues: List[ConfigIssue]) -> None:
    if not _positive(nu):
        issues.append(ConfigIssue(field_name, f"must be a positive integer, got {nu!r}"))
        return
    try:
        K_bound(nu, capacity)
    except CapacityError as e:
        issues.append(ConfigIssue(field_name, str(e), kind="capacity"))


def validate(config: ExperimentConfig) -> List[ConfigIssue]:
    """All violations of `config`; an empty list means it is ok to run."""
    issues: List[ConfigIssue] = []
    if config.experiment not in EXPERIMENTS:
        issues.append(ConfigIssue(
            "experiment", f"unknown experiment {config.experiment!r}; expected one of {', '.join(EXPERIMENTS)}"
        ))
        return issues
    if config.format not in FORMATS:
        issues.append(ConfigIssue("format", f"must be json or csv, got {config.format!r}"))
    if not _positive(config.trials):
        issues.append(ConfigIssue("trials", f"must be a positive integer, got {config.trials!r}"))
    if not isinstance(config.seed, int) or not 0 <= config.seed < 1 << 64:
        issues.append(ConfigIssue("seed", f"must be a 64-bit unsigned integer, got {config.seed!r}"))
    if not config.tol > 0:
        issues.append(ConfigIssue("tol", f"must be positive, got {config.tol!r}"))
    if not _positive(config.workers):
        issues.append(ConfigIssue("workers", f"must be a positive integer, got {config.workers!r}"))

    if config.experiment in _NU_EXPERIMENTS:
        if config.nu is None:
            issues.append(ConfigIssue("nu", f"required for {config.experiment}"))
        else:
            _check_nu(config.nu, "nu", config.capacity, issues)

    if config.experiment in _NU_LIST_EXPERIMENTS:
        if not config.nu_list:
            issues.append(ConfigIssue("nu_list", f"required for {config.experiment}"))
        elif not all(_positive(nu) for nu in config.nu_list):
            issues.append(ConfigIssue("nu_list", f"entries must be positive integers, got {config.nu_list!r}"))
        distribution = config.resolved_distribution
        if distribution not in DISTRIBUTIONS:
            issues.append(ConfigIssue(
                "distribution", f"unknown distribution {distribution!r}; expected one of {', '.join(DISTRIBUTIONS)}"
            ))
        elif config.experiment == "eps-ulln" and DISTRIBUTIONS[distribution] != "discrete":
            issues.append(ConfigIssue("distribution", f"eps-ulln needs a discrete distribution, got {distribution!r}"))

    if config.experiment == "eps-ulln":
        if config.epsilon is None or not config.epsilon > 0:
            issues.append(ConfigIssue("epsilon", "ε must be positive; ε=0 is the counterexample regime"))
        if not isinstance(config.grid_points, int) or config.grid_points < 2:
            issues.append(ConfigIssue("grid_points", f"must be an integer >= 2, got {config.grid_points!r}"))

    if config.experiment == "shatter":
        if not _positive(config.n):
            issues.append(ConfigIssue("n", f"must be a positive integer, got {config.n!r}"))
        elif config.n > config.capacity.max_shatter_n:
            issues.append(ConfigIssue(
                "n", f"shatter width n={config.n} exceeds capacity max_shatter_n={config.capacity.max_shatter_n}",
                kind="capacity",
            ))
    return issues


def require_valid(config: ExperimentConfig) -> ExperimentConfig:
    """Raise ConfigError listing every issue, or return `config` unchanged."""
    issues = validate(config)
    if issues:
        raise ConfigError(issues)
    return config
