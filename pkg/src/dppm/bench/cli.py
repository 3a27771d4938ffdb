"""``bench`` command line: run the grid, draw profiles, trace a single solve."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
import time
from typing import List, Optional

from ..baselines import parse_variants
from ..problems import INIT_IDS, PROBLEM_IDS, DIMS, benchmark_grid, make_initial_point, make_problem, parse_init_id
from ..solver import DPPM, IterationRecord, SolverConfig
from .profiles import performance_profile, write_profile_svg
from .runner import STATUS_CODES, env_workers, read_csv, run_grid, write_csv

log = logging.getLogger("dppm.bench")


def parse_int_list(text: str) -> List[int]:
    """``"1-3,5"`` -> ``[1, 2, 3, 5]``."""
    out: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_init_list(text: str) -> List[str]:
    """``"x1-x3,x8"`` -> ``["x1", "x2", "x3", "x8"]``."""
    out: List[str] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (parse_init_id(p) for p in part.split("-", 1))
            out.extend(f"x{j}" for j in range(lo, hi + 1))
        else:
            out.append(f"x{parse_init_id(part)}")
    return out


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, t=args.t, projection_vector=args.projection)


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--t", type=float, default=1.0, help="PRP damping constant (> 1/4)")
    p.add_argument("--projection", choices=("Fz", "Fx"), default="Fz",
                   help="vector used in the hyperplane projection step")


def cmd_run(args) -> int:
    solvers = parse_variants(args.solvers)
    grid = benchmark_grid(parse_int_list(args.problems), parse_int_list(args.dims), parse_init_list(args.inits))
    workers = env_workers(args.workers)
    t0 = time.perf_counter()
    results = run_grid(solvers, grid, _config(args), workers=workers)
    write_csv(results, args.out)
    ok = sum(r.converged for r in results)
    print(f"{len(results)} runs, {ok} converged, {time.perf_counter() - t0:.1f}s -> {args.out}")
    return 0


def cmd_profile(args) -> int:
    results = read_csv(args.input)
    curves = performance_profile(results, args.metric)
    write_profile_svg(curves, args.out, title=f"performance profile ({args.metric})")
    for c in curves:
        print(f"{c.solver_name}: rho(1)={c.points[0][1]:.3f} rho(max)={c.points[-1][1]:.3f}")
    return 0


TRACE_FIELDS = [f.name for f in dataclasses.fields(IterationRecord)]


def cmd_solve(args) -> int:
    spec = parse_variants(args.solver)[0]
    problem = make_problem(args.problem, args.dim)
    x0 = make_initial_point(args.init, args.dim)
    F = problem.residual()
    report = DPPM(F, problem.constraint, _config(args), **spec.rules).solve(x0)
    print(f"{spec.name} problem={args.problem} dim={args.dim} init={args.init}: "
          f"status={STATUS_CODES[report.status]} iter={report.iters} fval={report.fevals} "
          f"norm={report.final_norm:.5e} time_ms={report.elapsed * 1e3:.3f}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_FIELDS)
            for rec in report.trace:
                w.writerow([getattr(rec, name) for name in TRACE_FIELDS])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run solvers over a problem grid and write a CSV")
    p.add_argument("--solvers", default="dppm")
    p.add_argument("--problems", default=f"{PROBLEM_IDS[0]}-{PROBLEM_IDS[-1]}")
    p.add_argument("--dims", default=",".join(map(str, DIMS)))
    p.add_argument("--inits", default=f"{INIT_IDS[0]}-{INIT_IDS[-1]}")
    p.add_argument("--workers", type=int, default=1, help="overridden by BENCH_WORKERS")
    p.add_argument("--out", default="results.csv")
    _add_solver_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("profile", help="draw a performance profile from a results CSV")
    p.add_argument("--metric", choices=("iter", "fval", "time"), default="iter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="profile.svg")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("solve", help="solve one problem instance and optionally dump the iteration trace")
    p.add_argument("--solver", default="dppm")
    p.add_argument("--problem", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--init", default="x1")
    p.add_argument("--trace")
    _add_solver_options(p)
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
