"""Acceptance suite: one test and one summary line per criterion.

The full 200-cell grid is solved once per session with the default
configuration; criteria 1, 4, 5 and 8 read from that sweep.
"""

import math
import time

import numpy as np
import pytest

from dppm.bench.profiles import performance_profile
from dppm.bench.runner import STATUS_CODES, RunResult, read_csv, run_grid, write_csv
from dppm.baselines import get_variant
from dppm.core import check_monotone
from dppm.problems import PROBLEM_IDS, benchmark_grid, make_initial_point, make_problem
from dppm.solver import DPPM, SolverConfig, solve
from oracle import run_oracle

CFG = SolverConfig()
DESCENT_CFG = SolverConfig(u=10.0, t=5.0)


def expected_fevals(trace):
    return 1 + sum(1 + (rec.m + 1) + (rec.step_kind == "projection") for rec in trace)


def solve_cell(cell, cfg):
    pid, n, init = cell
    p = make_problem(pid, n)
    F = p.residual()
    report = solve(F, p.constraint, make_initial_point(init, n), cfg)
    return report, F.eval_count


@pytest.fixture(scope="session")
def sweep():
    """Every grid cell solved with the default config, plus wall-clock totals."""
    runs = {}
    sub_time = 0.0
    t_all = time.perf_counter()
    for cell in benchmark_grid():
        t0 = time.perf_counter()
        runs[cell] = solve_cell(cell, CFG)
        if cell[1] <= 10000:
            sub_time += time.perf_counter() - t0
    return runs, sub_time, time.perf_counter() - t_all


def test_criterion_1_convergence_sweep(sweep, criterion):
    runs, sub_time, total = sweep
    ok_cells = [c for c, (r, _) in runs.items() if r.converged]
    p2 = sum(1 for c in ok_cells if c[0] == 2)
    p3 = sum(1 for c in ok_cells if c[0] == 3)
    ok = len(ok_cells) >= 190 and p2 == 40 and p3 == 40 and sub_time < 300 and total < 1800
    detail = (f"converged {len(ok_cells)}/200 (need >= 190), P2 {p2}/40, P3 {p3}/40, "
              f"n<=10000 sub-grid {sub_time:.0f}s (< 300), full grid {total:.0f}s (< 1800)")
    assert criterion(1, ok, detail), detail


SPOTS = [
    ((3, 1000, "x1"), 5, 20),
    ((5, 1000, "x2"), 4, 16),
    ((2, 1000, "x3"), 6, 24),
]


def test_criterion_2_spot_iteration_counts(criterion):
    parts, ok = [], True
    for cell, lo, hi in SPOTS:
        r, _ = solve_cell(cell, CFG)
        good = r.converged and lo <= r.iters <= hi and r.final_norm <= 1e-5
        ok &= good
        parts.append(f"P{cell[0]} {cell[2]}: ITER={r.iters} in [{lo},{hi}] norm={r.final_norm:.2e} "
                     f"{'ok' if good else 'MISS'}")
    detail = "; ".join(parts)
    assert criterion(2, ok, detail), detail


@pytest.fixture(scope="session")
def descent_runs():
    return {cell: solve_cell(cell, DESCENT_CFG) for cell in benchmark_grid(dims=(1000,))}


def test_criterion_3_descent_invariant(descent_runs, criterion):
    c = 1 / DESCENT_CFG.u - 1 / (4 * DESCENT_CFG.t)
    assert c == pytest.approx(0.05)
    bad, checked = [], 0
    for cell, (r, _) in descent_runs.items():
        for rec in r.trace:
            checked += 1
            bound = -c * rec.residual_norm**2
            if not rec.descent_value <= bound + 1e-10 * abs(bound):
                bad.append((cell, rec.k))
    detail = f"{checked} iterations on 40 cells with u=10, t=5; {len(bad)} violations {bad[:3]}"
    assert criterion(3, not bad, detail), detail


def test_criterion_4_fejer_monotone(sweep, criterion):
    runs, _, _ = sweep
    bad, checked = [], 0
    for cell, (r, _) in runs.items():
        if cell[1] != 1000 or not r.converged:
            continue
        for rec in r.trace:
            if rec.step_kind != "projection":
                continue
            checked += 1
            if not rec.x_next_norm <= rec.x_norm * (1 + 1e-12):
                bad.append((cell, rec.k))
    detail = f"{checked} projection steps on converged n=1000 runs; {len(bad)} violations {bad[:3]}"
    assert criterion(4, not bad, detail), detail


def test_criterion_5_lambda_bounds(sweep, descent_runs, criterion):
    runs, _, _ = sweep
    bad, checked = [], 0
    for cfg, group in ((CFG, runs), (DESCENT_CFG, descent_runs)):
        for cell, (r, _) in group.items():
            for rec in r.trace:
                checked += 1
                in_bounds = cfg.ell <= rec.lambda_min <= rec.lambda_max <= cfg.u
                ratio_ok = math.isnan(rec.min_safeguarded_ratio) or rec.min_safeguarded_ratio > 0.0
                if not (in_bounds and ratio_ok):
                    bad.append((cell, rec.k))
    detail = f"{checked} iterations over 240 runs; {len(bad)} violations {bad[:3]}"
    assert criterion(5, not bad, detail), detail


def test_criterion_6_oracle_equivalence(criterion):
    n, iters = 5, 10
    p = make_problem(3, n)
    x0 = make_initial_point("x2", n)
    expected = run_oracle(p.fn, x0.tolist(), iters)

    solver = DPPM(p.residual(), p.constraint, CFG)
    state = solver.start(x0)
    got = [state.x.tolist()]
    while state.k < iters:
        k = state.k
        status = solver.step(state)
        if state.k > k:
            got.append(state.x.tolist())
        if status is not None:
            break
    same = got == expected
    detail = f"{len(expected) - 1} oracle iterations (stops at convergence), library {len(got) - 1}, bit-exact: {same}"
    assert criterion(6, same, detail), detail


def test_criterion_7_monotonicity(criterion):
    results = {}
    for pid in PROBLEM_IDS:
        p = make_problem(pid, 50)
        results[pid] = check_monotone(p.residual(), p.constraint, samples=1000, seed=pid)
    detail = ", ".join(f"P{k} {'ok' if v else 'FAIL'}" for k, v in results.items())
    assert criterion(7, all(results.values()), detail), detail


def test_criterion_8_accounting_profiles_csv(sweep, descent_runs, tmp_path, criterion):
    runs, _, _ = sweep
    fval_bad = [cell for group in (runs, descent_runs) for cell, (r, count) in group.items()
                if not r.fevals == count == expected_fevals(r.trace)]

    results = [
        RunResult("dppm", *cell, STATUS_CODES[r.status], r.iters, r.fevals, r.elapsed * 1e3, r.final_norm)
        for cell, (r, _) in runs.items()
    ]
    results += run_grid([get_variant("dppm-beta0")], benchmark_grid(dims=(1000,)))
    profile_ok = True
    for metric in ("iter", "fval", "time"):
        for c in performance_profile(results, metric):
            f = c.fractions
            profile_ok &= bool(np.all(np.diff(f) >= 0) and f.min() >= 0 and f.max() <= 1)

    path = tmp_path / "sweep.csv"
    write_csv(results, path)
    back = read_csv(path)
    csv_ok = len(back) == len(results) and all(
        (a.solver_name, a.cell, a.status, a.iters, a.fevals) == (b.solver_name, b.cell, b.status, b.iters, b.fevals)
        and (b.final_norm == a.final_norm or math.isclose(a.final_norm, b.final_norm, rel_tol=5e-6))
        for a, b in zip(results, back)
    )
    ok = not fval_bad and profile_ok and csv_ok
    detail = (f"FVAL formula mismatches {len(fval_bad)}/240, profiles monotone {profile_ok}, "
              f"CSV round-trip {csv_ok} ({len(results)} rows)")
    assert criterion(8, ok, detail), detail
