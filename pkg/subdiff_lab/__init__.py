"""
subdiff-lab: uniform laws of large numbers for subdifferentials
"""

from .system import create_lab, SubdiffLab
from .core.config import ExperimentConfig
from .core.reports import ExperimentReport

__version__ = "0.1.0"
__all__ = ['create_lab', 'SubdiffLab', 'ExperimentConfig', 'ExperimentReport']
