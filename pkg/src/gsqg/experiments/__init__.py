"""Numerical experiments on the data-to-solution maps, each producing an :class:`ExperimentReport`."""
from .dichotomy import DichotomyConfig, run_dichotomy
from .holder import HolderConfig, run_holder_boost
from .inequalities import InequalityConfig, run_inequality_sweep
from .nonuniform import NonuniformConfig, calibrate_nonuniform, run_nonuniform
from .report import ExperimentReport, parallel_map

__all__ = [
    "DichotomyConfig", "run_dichotomy", "HolderConfig", "run_holder_boost",
    "InequalityConfig", "run_inequality_sweep", "NonuniformConfig", "calibrate_nonuniform",
    "run_nonuniform", "ExperimentReport", "parallel_map",
]
