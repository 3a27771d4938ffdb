"""Vectors, residual maps with evaluation counting, and convex-set projections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConstraintSet",
    "ResidualMap",
    "as_vector",
    "check_monotone",
    "dot",
    "norm2",
    "project_box",
    "project_nonneg",
]


def as_vector(values) -> np.ndarray:
    """Return `values` as a 1-D float64 array (copied, read-only)."""
    v = np.array(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    v.flags.writeable = False
    return v


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product summed strictly left to right.

    ``np.dot`` uses pairwise/BLAS reductions whose order depends on the build;
    a cumulative sum is sequential, so results are reproducible everywhere.
    """
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.cumsum(a * b)[-1])


def norm2(a: np.ndarray) -> float:
    return math.sqrt(dot(a, a))


class ResidualMap:
    """Wraps ``F: R^n -> R^n`` and counts every evaluation.

    The count is the FVAL column reported by the solver; nothing else in the
    package calls ``fn`` directly.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dim: int, name: str = ""):
        if dim < 1:
            raise ValueError("dim must be positive")
        self._fn = fn
        self.dim = dim
        self.name = name
        self.eval_count = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {x.shape}")
        self.eval_count += 1
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(self._fn(x), dtype=np.float64)
        if out.shape != (self.dim,):
            raise ValueError(f"residual returned shape {out.shape}, expected ({self.dim},)")
        return out

    def fresh(self) -> "ResidualMap":
        """Same map, zeroed counter."""
        return ResidualMap(self._fn, self.dim, self.name)

    def __repr__(self) -> str:
        return f"ResidualMap({self.name or self._fn!r}, dim={self.dim}, eval_count={self.eval_count})"


def project_nonneg(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def project_box(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    if np.any(lower > upper):
        raise ValueError("box bounds are inverted (lower > upper for some component)")
    return np.minimum(np.maximum(x, lower), upper)


@dataclass(frozen=True)
class ConstraintSet:
    """Closed convex set with exact projection.

    ``kind`` is one of ``"nonneg_orthant"``, ``"box"`` or ``"whole_space"``;
    bounds are only meaningful for ``"box"``.
    """

    kind: str
    lower: Optional[np.ndarray] = field(default=None, compare=False)
    upper: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("nonneg_orthant", "box", "whole_space"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ValueError("box constraint needs lower and upper bounds")
            lo = np.asarray(self.lower, dtype=np.float64)
            hi = np.asarray(self.upper, dtype=np.float64)
            if lo.shape != hi.shape:
                raise ValueError("box bounds have different shapes")
            if np.any(lo > hi):
                raise ValueError("box bounds are inverted (lower > upper for some component)")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)

    @classmethod
    def nonneg_orthant(cls) -> "ConstraintSet":
        return cls("nonneg_orthant")

    @classmethod
    def box(cls, lower, upper) -> "ConstraintSet":
        return cls("box", lower, upper)

    @classmethod
    def whole_space(cls) -> "ConstraintSet":
        return cls("whole_space")

    def project(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "nonneg_orthant":
            return project_nonneg(x)
        if self.kind == "box":
            return project_box(x, self.lower, self.upper)
        return np.array(x, dtype=np.float64)

    def contains(self, x: np.ndarray) -> bool:
        if self.kind == "nonneg_orthant":
            return bool(np.all(x >= 0.0))
        if self.kind == "box":
            return bool(np.all((x >= self.lower) & (x <= self.upper)))
        return True


def check_monotone(
    F: ResidualMap,
    omega: ConstraintSet,
    samples: int = 1000,
    seed: int = 0,
    scale: float = 2.0,
) -> bool:
    """Spot-check ``<F(x) - F(y), x - y> >= 0`` on random pairs in `omega`.

    Points are drawn uniformly from ``[-scale, scale]^n`` and projected onto
    `omega`. A relative slack of 1e-12 absorbs round-off. Returns False on the
    first violating pair; this is a diagnostic, not an error.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = F.dim
    for _ in range(samples):
        x = omega.project(rng.uniform(-scale, scale, n))
        y = omega.project(rng.uniform(-scale, scale, n))
        dF = F(x) - F(y)
        dx = x - y
        if not dot(dF, dx) >= -1e-12 * norm2(dx) * norm2(dF):
            return False
    return True
