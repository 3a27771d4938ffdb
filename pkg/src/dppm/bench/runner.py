"""Run solver variants over the problem grid and persist the results as CSV."""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from ..baselines import VariantSpec, get_variant
from ..problems import make_initial_point, make_problem
from ..solver import SolverConfig, solve

log = logging.getLogger(__name__)

CSV_HEADER = ["solver", "problem", "dim", "init", "status", "iter", "fval", "time_ms", "norm"]

# solver status -> CSV status code
STATUS_CODES = {
    "converged": "converged",
    "max_iter": "max_iter",
    "line_search_failure": "ls_fail",
    "nonfinite_residual": "nonfinite",
}

Cell = Tuple[int, int, str]


@dataclass(frozen=True)
class RunResult:
    solver_name: str
    problem_id: int
    dim: int
    init_id: str
    status: str
    iters: int
    fevals: int
    time_ms: float
    final_norm: float

    @property
    def cell(self) -> Cell:
        return (self.problem_id, self.dim, self.init_id)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def run_one(spec: VariantSpec, cell: Cell, cfg: SolverConfig) -> RunResult:
    problem_id, dim, init_id = cell
    problem = make_problem(problem_id, dim)
    x0 = make_initial_point(init_id, dim)
    F = problem.residual()
    t0 = time.perf_counter()
    report = solve(F, problem.constraint, x0, cfg, **spec.rules)
    elapsed = time.perf_counter() - t0
    return RunResult(
        solver_name=spec.name,
        problem_id=problem_id,
        dim=dim,
        init_id=init_id,
        status=STATUS_CODES[report.status],
        iters=report.iters,
        fevals=report.fevals,
        time_ms=elapsed * 1e3,
        final_norm=report.final_norm,
    )


def _run_packed(args):
    return run_one(*args)


def run_grid(
    solvers: Sequence[VariantSpec],
    grid: Sequence[Cell],
    cfg: SolverConfig = SolverConfig(),
    workers: int = 1,
) -> List[RunResult]:
    """Every solver on every cell, in grid order (cell-major, then solver).

    Solver failures are recorded in the result status; they never raise.
    """
    if not grid:
        raise ValueError("grid is empty")
    solvers = [get_variant(s) if isinstance(s, str) else s for s in solvers]
    jobs = [(spec, cell, cfg) for cell in grid for spec in solvers]
    if workers <= 1:
        out = []
        for job in jobs:
            res = run_one(*job)
            log.info("%s P%d n=%d %s: %s iter=%d", res.solver_name, *res.cell, res.status, res.iters)
            out.append(res)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, whatever the completion order
        return list(pool.map(_run_packed, jobs, chunksize=1))


def write_csv(results: Iterable[RunResult], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in results:
                w.writerow([
                    r.solver_name, r.problem_id, r.dim, r.init_id, r.status,
                    r.iters, r.fevals, f"{r.time_ms:.3f}", f"{r.final_norm:.5e}",
                ])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_csv(path) -> List[RunResult]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {header!r}")
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    return [
        RunResult(
            solver_name=row[0], problem_id=int(row[1]), dim=int(row[2]), init_id=row[3], status=row[4],
            iters=int(row[5]), fevals=int(row[6]), time_ms=float(row[7]), final_norm=float(row[8]),
        )
        for row in rows
    ]


def env_workers(default: int = 1) -> int:
    raw = os.environ.get("BENCH_WORKERS")
    if not raw:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError("BENCH_WORKERS must be a positive integer")
    return n
