"""Dolan-More performance profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .runner import RunResult

METRICS = {"iter": "iters", "iters": "iters", "fval": "fevals", "fevals": "fevals", "time": "time_ms", "time_ms": "time_ms"}


@dataclass(frozen=True)
class ProfileCurve:
    solver_name: str
    points: Tuple[Tuple[float, float], ...]

    @property
    def taus(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def fractions(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def default_taus() -> np.ndarray:
    return np.logspace(0.0, 2.0, 200)


def performance_ratios(results: Sequence[RunResult], metric: str) -> Dict[str, np.ndarray]:
    """Per-solver ratio to the best solver on each common cell (``inf`` on failure).

    When the best value on a cell is 0 (e.g. zero iterations) the denominator
    is taken as 1.
    """
    try:
        attr = METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; use iter, fval or time") from None
    by_solver: Dict[str, Dict[tuple, RunResult]] = {}
    for r in results:
        by_solver.setdefault(r.solver_name, {})[r.cell] = r
    if not by_solver:
        return {}
    cells = sorted(set.intersection(*(set(d) for d in by_solver.values())))
    names = list(by_solver)
    values = np.full((len(names), len(cells)), np.inf)
    for i, name in enumerate(names):
        for j, cell in enumerate(cells):
            r = by_solver[name][cell]
            if r.converged:
                values[i, j] = float(getattr(r, attr))
    best = values.min(axis=0) if len(cells) else np.array([])
    denom = np.where(best > 0, best, 1.0)
    with np.errstate(invalid="ignore"):
        ratios = values / denom
    ratios[np.isinf(values)] = np.inf
    return {name: ratios[i] for i, name in enumerate(names)}


def performance_profile(
    results: Sequence[RunResult], metric: str = "iter", taus: Optional[Sequence[float]] = None
) -> List[ProfileCurve]:
    """One curve per solver: fraction of common cells with ratio <= tau.

    If some finite ratio exceeds the largest tau, that ratio is appended to the
    grid so the last point of each curve is the solver's success rate.
    """
    taus = default_taus() if taus is None else np.asarray(taus, dtype=float)
    if np.any(taus < 1.0):
        raise ValueError("tau values must be >= 1")
    taus = np.sort(taus)
    ratios = performance_ratios(results, metric)
    finite = [v[np.isfinite(v)].max() for v in ratios.values() if np.isfinite(v).any()]
    if finite and max(finite) > taus[-1]:
        # close every curve at its success rate
        taus = np.append(taus, max(finite))
    curves = []
    for name, r in ratios.items():
        m = r.size
        frac = [float(np.count_nonzero(r <= tau)) / m if m else 0.0 for tau in taus]
        curves.append(ProfileCurve(name, tuple(zip(taus.tolist(), frac))))
    return curves


def write_profile_svg(curves: Sequence[ProfileCurve], path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for c in curves:
        ax.step(c.taus, c.fractions, where="post", label=c.solver_name)
    ax.set_xscale("log")
    ax.set_ylim(0.0, 1.02)
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\rho(\tau)$")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(True, which="both", alpha=0.3)
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write profile to {path}: {exc}") from exc
    finally:
        plt.close(fig)
