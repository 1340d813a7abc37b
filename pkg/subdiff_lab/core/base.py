"""
Foundation types shared by the experiment machinery.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
from datetime import datetime


class LabException(Exception):
    """Base exception class for subdiff-lab errors"""
    pass


class DomainError(LabException, ValueError):
    """An operation was called outside its precondition"""
    pass


class CapacityError(LabException):
    """A configured size limit (nu cap, bit budget, shatter width) was exceeded"""
    pass


class RunTimeoutError(CapacityError, TimeoutError):
    """The run did not finish within Resources.timeout"""

    def __init__(self, timeout: float, abandoned: List[str]):
        self.timeout = timeout
        self.abandoned = list(abandoned)
        super().__init__(f"Run exceeded {timeout}s with {len(self.abandoned)} trials unfinished")


class UnsupportedInputError(LabException):
    """Input lacks the certified structure an exact computation needs"""
    pass


class ConfigError(LabException):
    """Invalid experiment configuration"""

    def __init__(self, issues: List[Any]):
        self.issues = list(issues)
        super().__init__("; ".join(str(issue) for issue in self.issues))

    @property
    def is_capacity(self) -> bool:
        return any(getattr(issue, "kind", "config") == "capacity" for issue in self.issues)


class TrialError(LabException):
    """A trial failed inside the worker pool"""

    def __init__(self, task_id: str, cause: BaseException):
        self.task_id = task_id
        self.cause = cause
        super().__init__(f"Trial {task_id} failed: {cause}")


@dataclass
class Task:
    """One independent trial of an experiment"""
    id: str
    index: int
    seed: int
    data: Dict[str, Any] = field(default_factory=dict)
    created_at: datetime = field(default_factory=datetime.now)


@dataclass
class Plan:
    """Ordered list of trials for one run"""
    experiment: str
    tasks: List[Task]
    estimated_duration: float = 0.0


@dataclass
class Resources:
    """Worker pool allocation"""
    workers: int = 1
    timeout: Optional[float] = None


@dataclass
class ExecutionContext:
    """Context for one run"""
    start_time: datetime
    resources: Resources
    metadata: Dict[str, Any] = field(default_factory=dict)
