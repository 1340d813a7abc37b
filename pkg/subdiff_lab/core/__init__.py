"""
Core components of subdiff-lab.
"""

from .base import (
    LabException,
    DomainError,
    CapacityError,
    UnsupportedInputError,
    ConfigError,
    TrialError,
    Task,
    Plan,
    Resources,
    ExecutionContext
)

from .dyadic import (
    Capacity,
    DEFAULT_CAPACITY,
    BitStream,
    DyadicRational,
    bit_k,
    expansion_partial_sum,
    K_bound,
    find_joint_one_bit,
    shatter_witness,
    verify_shattering
)

from .setval import (
    Interval,
    Segment2,
    ConvexPolygon,
    excess,
    hausdorff,
    minkowski_average,
    dist_point
)

from .lip_cx import LipGeometry, LipschitzScenario
from .cvx_cx import CvxGeometry, ConvexScenario

from .cvx_ulln import (
    PiecewiseLinearConvex,
    ScenarioDistribution,
    BracketDiagnostic,
    CertifiedConvex
)

from .config import ExperimentConfig, ConfigIssue, validate
from .coordinator import TrialCoordinator, RunMonitor

from .reports import (
    ExperimentReport,
    GapReport,
    ConvergenceReport,
    GadgetReport,
    ShatterReport,
    ReportWriter
)

__all__ = [
    # Base
    'LabException',
    'DomainError',
    'CapacityError',
    'UnsupportedInputError',
    'ConfigError',
    'TrialError',
    'Task',
    'Plan',
    'Resources',
    'ExecutionContext',

    # Dyadic
    'Capacity',
    'DEFAULT_CAPACITY',
    'BitStream',
    'DyadicRational',
    'bit_k',
    'expansion_partial_sum',
    'K_bound',
    'find_joint_one_bit',
    'shatter_witness',
    'verify_shattering',

    # Set-valued
    'Interval',
    'Segment2',
    'ConvexPolygon',
    'excess',
    'hausdorff',
    'minkowski_average',
    'dist_point',

    # Constructions
    'LipGeometry',
    'LipschitzScenario',
    'CvxGeometry',
    'ConvexScenario',

    # Univariate laws
    'PiecewiseLinearConvex',
    'ScenarioDistribution',
    'BracketDiagnostic',
    'CertifiedConvex',

    # Running
    'ExperimentConfig',
    'ConfigIssue',
    'validate',
    'TrialCoordinator',
    'RunMonitor',

    # Reports
    'ExperimentReport',
    'GapReport',
    'ConvergenceReport',
    'GadgetReport',
    'ShatterReport',
    'ReportWriter'
]
