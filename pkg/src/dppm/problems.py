"""Benchmark test problems, initial points and the experiment grid.

All five residual maps are monotone on the nonnegative orthant and vanish at
the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from .core import ConstraintSet, ResidualMap

__all__ = [
    "DIMS",
    "INIT_IDS",
    "PROBLEM_IDS",
    "ProblemInstance",
    "benchmark_grid",
    "make_initial_point",
    "make_problem",
    "parse_init_id",
]

PROBLEM_IDS = (1, 2, 3, 4, 5)
DIMS = (1000, 5000, 10000, 50000, 100000)
INIT_IDS = ("x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8")


def _modified_exponential(x):
    out = np.exp(x)
    out[1:] -= x[:-1]
    out -= 1.0
    return out


def _modified_logarithmic(x):
    return np.log(np.abs(x) + 1.0) - x / x.size


def _nonsmooth(x):
    return 2.0 * x - np.sin(np.abs(x))


def _min_max(x):
    ax = np.abs(x)
    return np.minimum(np.minimum(ax, x * x), np.maximum(ax, x * x * x))


def _strictly_convex(x):
    return np.exp(x) - 1.0


_PROBLEMS: Dict[int, Tuple[str, Callable[[np.ndarray], np.ndarray]]] = {
    1: ("Modified Exponential Function", _modified_exponential),
    2: ("Modified Logarithmic Function", _modified_logarithmic),
    3: ("Nonsmooth Function", _nonsmooth),
    4: ("Min-max Function", _min_max),
    5: ("Strictly Convex Function", _strictly_convex),
}


@dataclass(frozen=True)
class ProblemInstance:
    id: int
    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    constraint: ConstraintSet

    @property
    def known_solution(self) -> np.ndarray:
        return np.zeros(self.dim)

    def residual(self) -> ResidualMap:
        """A new evaluation-counting wrapper; one per solver run."""
        return ResidualMap(self.fn, self.dim, name=f"problem{self.id}")


def make_problem(problem_id: int, n: int) -> ProblemInstance:
    if problem_id not in _PROBLEMS:
        raise ValueError(f"unknown problem id {problem_id!r}; expected one of {PROBLEM_IDS}")
    if n < 2:
        raise ValueError("problems need n >= 2")
    name, fn = _PROBLEMS[problem_id]
    return ProblemInstance(problem_id, name, n, fn, ConstraintSet.nonneg_orthant())


def parse_init_id(init_id) -> int:
    s = str(init_id).lower()
    if s.startswith("x"):
        s = s[1:]
    try:
        j = int(s)
    except ValueError:
        j = 0
    if not 1 <= j <= 8:
        raise ValueError(f"unknown initial point {init_id!r}; expected x1..x8")
    return j


def make_initial_point(init_id, n: int) -> np.ndarray:
    """Starting point `init_id` (``"x1"``..``"x8"``) in dimension `n`."""
    j = parse_init_id(init_id)
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(1, n + 1, dtype=np.float64)
    if j == 1:
        return np.ones(n)
    if j == 2:
        return np.full(n, 0.1)
    if j == 3:
        # 2**-i underflows to exactly 0 past i = 1074
        return np.ldexp(1.0, -np.arange(1, n + 1))
    if j == 4:
        return i * (n - 1) / n
    if j == 5:
        return (i - 1) / n
    if j == 6:
        return 1.0 / i
    if j == 7:
        return (n - i) / n
    return i / n


def benchmark_grid(problems=PROBLEM_IDS, dims=DIMS, inits=INIT_IDS) -> List[Tuple[int, int, str]]:
    """Cells ``(problem, dim, init)`` ordered by problem, then dim, then init."""
    return [(p, n, x) for p in problems for n in dims for x in inits]
