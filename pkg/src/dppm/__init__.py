"""Derivative-free diagonal PRP-type projection solver for convex-constrained monotone equations."""

from .core import ConstraintSet, ResidualMap, check_monotone, dot, norm2, project_box, project_nonneg
from .problems import benchmark_grid, make_initial_point, make_problem
from .solver import DPPM, IterationRecord, SolverConfig, SolverReport, SolverState, solve

__version__ = "0.1.0"
