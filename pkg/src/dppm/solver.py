"""Diagonal PRP-type projection method for monotone equations on a convex set.

The solver is split into small pure building blocks (safeguard, scaling
update, beta, direction, trial step, line search, projection step) and a
:class:`DPPM` driver that advances a :class:`SolverState` one iteration at a
time, so a run can be paused, inspected and resumed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .core import ConstraintSet, ResidualMap, as_vector, dot, norm2

__all__ = [
    "DPPM",
    "IterationRecord",
    "LineSearchFailure",
    "SolverConfig",
    "SolverReport",
    "SolverState",
    "classic_delta",
    "compute_beta",
    "compute_direction",
    "initial_trial_stepsize",
    "line_search",
    "projection_step",
    "safeguard_y",
    "safeguard_y_vec",
    "solve",
    "update_scaling",
]

CONVERGED = "converged"
MAX_ITER = "max_iter"
LS_FAILURE = "line_search_failure"
NONFINITE = "nonfinite_residual"

PURE_DIAGONAL = "pure_diagonal"
COMBINED = "combined"

BETA_RULES = ("prp_modified", "zero")
SAFEGUARD_RULES = ("case_i_ii", "classic_delta")
SCALING_RULES = ("diagonal", "identity")


@dataclass(frozen=True)
class SolverConfig:
    """Scalars driving a run. Defaults are the published experiment settings.

    ``t`` is never given for the experiments; 1 satisfies ``t > 1/4``.
    ``projection_vector`` selects the vector the hyperplane step moves along:
    ``"Fz"`` (residual at the line-search point, the default) or ``"Fx"``
    (residual at the current iterate, as the printed pseudo-code reads).
    """

    rho: float = 0.8
    sigma: float = 0.01
    theta: float = 0.1
    ell: float = 1e-10
    u: float = 1e10
    mu: float = 1e10
    t: float = 1.0
    eps_safeguard: float = 1e-10
    gamma: float = 1e-8
    beta_floor: float = 1e-6
    tol: float = 1e-5
    max_iter: int = 1000
    max_backtracks: int = 60
    projection_vector: str = "Fz"

    def __post_init__(self):
        for name in ("rho", "sigma", "theta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not 0.0 < self.ell <= 1.0 <= self.u:
            raise ValueError(f"need 0 < ell <= 1 <= u, got ell={self.ell}, u={self.u}")
        if not self.t > 0.25:
            raise ValueError(f"t must exceed 1/4, got {self.t}")
        for name in ("mu", "eps_safeguard", "gamma", "tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.max_backtracks < 1:
            raise ValueError("max_iter and max_backtracks must be positive")
        if self.projection_vector not in ("Fz", "Fx"):
            raise ValueError("projection_vector must be 'Fz' or 'Fx'")

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class IterationRecord:
    """Observables of one iteration.

    ``descent_value`` is ``<F(x_k), d_k>``; ``lambda_min``/``lambda_max`` give
    the range of the diagonal scaling after this iteration's update;
    ``fevals`` is the running evaluation count when the iteration ended.
    """

    k: int
    alpha: float
    beta: float
    m: int
    branch: str
    residual_norm: float
    descent_value: float
    step_norm: float
    step_kind: str  # "projection", "early_exit" or "ls_fail"
    d_norm: float
    trial_beta: float
    x_norm: float
    x_next_norm: float
    lambda_min: float
    lambda_max: float
    min_safeguarded_ratio: float
    fevals: int


@dataclass
class SolverReport:
    status: str
    solution: np.ndarray
    iters: int
    fevals: int
    final_norm: float
    elapsed: float
    trace: List[IterationRecord] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass
class SolverState:
    k: int
    x: np.ndarray
    Fx: np.ndarray
    F_norm: float
    lam: np.ndarray
    d: Optional[np.ndarray] = None
    prev_F_norm: Optional[float] = None
    prev_d: Optional[np.ndarray] = None
    prev_y: Optional[np.ndarray] = None
    best_x: Optional[np.ndarray] = None
    best_norm: float = math.inf
    status: Optional[str] = None
    trace: List[IterationRecord] = field(default_factory=list)


class LineSearchFailure(RuntimeError):
    pass


# -- building blocks ---------------------------------------------------------


def safeguard_y(s_i: float, y_i: float, Fk_i: float, Fk1_i: float, theta: float, eps: float) -> float:
    """Replace ``y_i`` when its sign disagrees with ``s_i``.

    ``Fk_i`` / ``Fk1_i`` are the i-th residual components at the new and the
    previous iterate.
    """
    if s_i > 0 and y_i <= 0:
        return theta * max(max(abs(Fk1_i), abs(Fk_i)), eps)
    if s_i < 0 and y_i >= 0:
        return -theta * max(max(abs(Fk1_i), abs(Fk_i)), eps)
    return y_i


def safeguard_y_vec(s, y, F_new, F_old, theta: float, eps: float) -> np.ndarray:
    """Componentwise :func:`safeguard_y`."""
    mag = theta * np.maximum(np.maximum(np.abs(F_old), np.abs(F_new)), eps)
    out = np.array(y, dtype=np.float64)
    case1 = (s > 0) & (y <= 0)
    case2 = (s < 0) & (y >= 0)
    out[case1] = mag[case1]
    out[case2] = -mag[case2]
    return out


def update_scaling(s: np.ndarray, y_safe: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Clipped per-coordinate secant ratios ``y_i / s_i``; 1 where ``s_i == 0``."""
    if s.shape != y_safe.shape:
        raise ValueError("s and y must have the same dimension")
    nz = s != 0
    lam = np.ones_like(s)
    with np.errstate(over="ignore"):
        lam[nz] = np.maximum(np.minimum(y_safe[nz] / s[nz], cfg.u), cfg.ell)
    return lam


def classic_delta(s: np.ndarray, y: np.ndarray) -> float:
    """Scalar Rayleigh-type replacement ``<s, y> / <s, s>``; 1 when ``s == 0``."""
    ss = dot(s, s)
    if ss == 0.0:
        return 1.0
    return dot(s, y) / ss


def _scaling_classic(s: np.ndarray, y: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    nz = s != 0
    lam = np.ones_like(s)
    ratio = y[nz] / s[nz]
    delta = classic_delta(s, y)
    ratio = np.where(ratio > 0, ratio, delta)
    lam[nz] = np.maximum(np.minimum(ratio, cfg.u), cfg.ell)
    return lam


def compute_beta(Fk: np.ndarray, Fk_norm_prev: float, y_prev: np.ndarray, d_prev: np.ndarray, t: float) -> float:
    """Modified PRP coefficient, clamped at zero."""
    Fy = dot(Fk, y_prev)
    Fd = dot(Fk, d_prev)
    nk = norm2(Fk)
    val = Fy / Fk_norm_prev**2 - t * (Fd / Fk_norm_prev**4) * (Fy / nk) ** 2
    if not val > 0.0:
        return 0.0
    return val


def compute_direction(
    Fk: np.ndarray,
    lam: np.ndarray,
    beta_k: float,
    d_prev: Optional[np.ndarray],
    y_prev: Optional[np.ndarray],
    mu: float,
    first_iteration: bool,
) -> Tuple[np.ndarray, str]:
    """Search direction and the branch that produced it.

    The first direction is the negative residual. Afterwards ``-D_k F_k`` is
    used alone when ``|<F_k, y_prev>| ||d_prev|| >= mu ||F_k||`` and is
    combined with ``beta_k d_prev`` otherwise.
    """
    if first_iteration:
        return -Fk, PURE_DIAGONAL
    scaled = Fk / lam
    if abs(dot(Fk, y_prev)) * norm2(d_prev) >= mu * norm2(Fk):
        return -scaled, PURE_DIAGONAL
    return -scaled + beta_k * d_prev, COMBINED


def initial_trial_stepsize(F: ResidualMap, x: np.ndarray, Fx: np.ndarray, d: np.ndarray, cfg: SolverConfig) -> float:
    """Divided-difference trial step; falls back to 1 when tiny or non-finite.

    The numerator keeps the sign as published (``<F(x), d>``, negative for a
    descent direction), so the fallback fires on most iterations.
    """
    Fp = F(x + cfg.gamma * d)
    with np.errstate(all="ignore"):
        denom = dot(d, Fp - Fx) / cfg.gamma
        num = dot(Fx, d)
        beta = float(np.float64(num) / denom)
    if not math.isfinite(beta) or beta <= cfg.beta_floor:
        return 1.0
    return beta


def _accepts(Fz: np.ndarray, d: np.ndarray, alpha: float, dd: float, sigma: float) -> bool:
    lhs = dot(Fz, d)
    rhs = -sigma * alpha * norm2(Fz) * dd
    return math.isfinite(lhs) and math.isfinite(rhs) and lhs <= rhs


def line_search(
    F: ResidualMap, x: np.ndarray, d: np.ndarray, beta_trial: float, cfg: SolverConfig
) -> Tuple[float, np.ndarray, np.ndarray, int]:
    """Derivative-free backtracking along `d` starting from `beta_trial`.

    Returns ``(alpha, z, F(z), m)`` for the smallest accepted ``m``. Raises
    :class:`LineSearchFailure` after ``max_backtracks`` rejections.
    Non-finite probes count as rejections.
    """
    dd = dot(d, d)
    with np.errstate(all="ignore"):
        for m in range(cfg.max_backtracks + 1):
            alpha = beta_trial * cfg.rho**m
            z = x + alpha * d
            Fz = F(z)
            if _accepts(Fz, d, alpha, dd, cfg.sigma):
                return alpha, z, Fz, m
    raise LineSearchFailure(f"no acceptable step after {cfg.max_backtracks} backtracks")


def projection_step(
    x: np.ndarray, z: np.ndarray, Fz: np.ndarray, omega: ConstraintSet, along: Optional[np.ndarray] = None
) -> np.ndarray:
    """Project `x` onto the hyperplane separating it from the solutions, then onto `omega`.

    `along` overrides the vector the step moves along (defaults to `Fz`).
    """
    ff = dot(Fz, Fz)
    if ff == 0.0:
        # z solves F but lies outside omega.
        return omega.project(z)
    xi = dot(x - z, Fz) / ff
    v = Fz if along is None else along
    return omega.project(x - xi * v)


# -- driver ------------------------------------------------------------------


def _finite(v: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(v)))


class DPPM:
    """Resumable solver bound to one residual map and one constraint set.

    The rule arguments select ablation variants; the defaults give the full
    method.
    """

    def __init__(
        self,
        F: ResidualMap,
        omega: ConstraintSet,
        cfg: SolverConfig = SolverConfig(),
        *,
        beta_rule: str = "prp_modified",
        safeguard_rule: str = "case_i_ii",
        scaling_rule: str = "diagonal",
    ):
        if beta_rule not in BETA_RULES:
            raise ValueError(f"unknown beta rule {beta_rule!r}")
        if safeguard_rule not in SAFEGUARD_RULES:
            raise ValueError(f"unknown safeguard rule {safeguard_rule!r}")
        if scaling_rule not in SCALING_RULES:
            raise ValueError(f"unknown scaling rule {scaling_rule!r}")
        self.F = F
        self.omega = omega
        self.cfg = cfg
        self.beta_rule = beta_rule
        self.safeguard_rule = safeguard_rule
        self.scaling_rule = scaling_rule

    def start(self, x0) -> SolverState:
        x = as_vector(x0)
        if x.shape != (self.F.dim,):
            raise ValueError(f"x0 has dimension {x.size}, residual map expects {self.F.dim}")
        if not self.omega.contains(x):
            x = self.omega.project(x)
        x = np.array(x, dtype=np.float64)
        Fx = self.F(x)
        nF = norm2(Fx)
        state = SolverState(k=0, x=x, Fx=Fx, F_norm=nF, lam=np.ones(self.F.dim))
        if math.isfinite(nF):
            state.best_x, state.best_norm = x, nF
        else:
            state.status = NONFINITE
        return state

    def _check_stop(self, state: SolverState) -> Optional[str]:
        if state.status is not None:
            return state.status
        if state.F_norm <= self.cfg.tol:
            state.status = CONVERGED
        elif state.k >= self.cfg.max_iter:
            state.status = MAX_ITER
        return state.status

    def step(self, state: SolverState) -> Optional[str]:
        """Advance one iteration. Returns the terminal status, or None to continue."""
        if self._check_stop(state) is not None:
            return state.status
        cfg, F = self.cfg, self.F
        x, Fx, nF = state.x, state.Fx, state.F_norm
        first = state.prev_d is None

        beta = 0.0
        if not first and self.beta_rule == "prp_modified":
            beta = compute_beta(Fx, state.prev_F_norm, state.prev_y, state.prev_d, cfg.t)
        with np.errstate(all="ignore"):
            if self.beta_rule == "zero" and not first:
                d, branch = -(Fx / state.lam), PURE_DIAGONAL
            else:
                d, branch = compute_direction(Fx, state.lam, beta, state.prev_d, state.prev_y, cfg.mu, first)
        if not _finite(d):
            state.status = NONFINITE
            return state.status
        state.d = d

        descent = dot(Fx, d)
        d_norm = norm2(d)
        trial = initial_trial_stepsize(F, x, Fx, d, cfg)
        record = dict(
            k=state.k, beta=beta, branch=branch, residual_norm=nF, descent_value=descent,
            d_norm=d_norm, trial_beta=trial, x_norm=norm2(x),
        )
        lam_range = dict(lambda_min=float(state.lam.min()), lambda_max=float(state.lam.max()))

        try:
            alpha, z, Fz, m = line_search(F, x, d, trial, cfg)
        except LineSearchFailure:
            state.trace.append(IterationRecord(
                alpha=math.nan, m=cfg.max_backtracks, step_norm=0.0, step_kind="ls_fail",
                x_next_norm=record["x_norm"], min_safeguarded_ratio=math.nan,
                fevals=F.eval_count, **lam_range, **record,
            ))
            state.status = LS_FAILURE
            return state.status

        nFz = norm2(Fz)
        if self.omega.contains(z) and nFz <= cfg.tol:
            state.trace.append(IterationRecord(
                alpha=alpha, m=m, step_norm=norm2(z - x), step_kind="early_exit",
                x_next_norm=norm2(z), min_safeguarded_ratio=math.nan,
                fevals=F.eval_count, **lam_range, **record,
            ))
            state.k += 1
            state.x, state.Fx, state.F_norm = z, Fz, nFz
            state.best_x, state.best_norm = z, nFz
            return self._check_stop(state)

        along = Fx if cfg.projection_vector == "Fx" else None
        with np.errstate(all="ignore"):
            x_new = projection_step(x, z, Fz, self.omega, along)
        F_new = F(x_new)
        n_new = norm2(F_new)
        s = x_new - x
        y = F_new - Fx

        with np.errstate(all="ignore"):
            if self.scaling_rule == "identity":
                lam = np.ones_like(s)
                min_ratio = math.nan
            elif self.safeguard_rule == "case_i_ii":
                y_safe = safeguard_y_vec(s, y, F_new, Fx, cfg.theta, cfg.eps_safeguard)
                nz = s != 0
                min_ratio = float(np.min(y_safe[nz] / s[nz])) if nz.any() else math.nan
                lam = update_scaling(s, y_safe, cfg)
            else:
                lam = _scaling_classic(s, y, cfg)
                min_ratio = math.nan

        state.trace.append(IterationRecord(
            alpha=alpha, m=m, step_norm=norm2(s), step_kind="projection",
            x_next_norm=norm2(x_new), min_safeguarded_ratio=min_ratio,
            lambda_min=float(lam.min()), lambda_max=float(lam.max()),
            fevals=F.eval_count, **record,
        ))
        state.k += 1
        if not math.isfinite(n_new):
            state.status = NONFINITE
            return state.status

        state.prev_F_norm = nF
        state.prev_d = d
        state.prev_y = y
        state.x, state.Fx, state.F_norm = x_new, F_new, n_new
        state.lam = lam
        if n_new < state.best_norm:
            state.best_x, state.best_norm = x_new, n_new
        return self._check_stop(state)

    def run(self, state: SolverState) -> SolverState:
        while self.step(state) is None:
            pass
        return state

    def report(self, state: SolverState, elapsed: float = 0.0) -> SolverReport:
        if state.status in (CONVERGED, MAX_ITER):
            sol, nrm = state.x, state.F_norm
        else:
            sol = state.best_x if state.best_x is not None else state.x
            nrm = state.best_norm if state.best_x is not None else state.F_norm
        return SolverReport(
            status=state.status, solution=sol, iters=state.k, fevals=self.F.eval_count,
            final_norm=nrm, elapsed=elapsed, trace=state.trace,
        )

    def solve(self, x0) -> SolverReport:
        t0 = time.perf_counter()
        state = self.run(self.start(x0))
        return self.report(state, time.perf_counter() - t0)


def solve(F: ResidualMap, omega: ConstraintSet, x0, cfg: SolverConfig = SolverConfig(), **rules) -> SolverReport:
    """Run the method from `x0` until convergence or a stopping rule fires."""
    return DPPM(F, omega, cfg, **rules).solve(x0)
