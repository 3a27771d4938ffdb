"""Ablation variants assembled from the method's own ingredients.

Each variant swaps one rule of the full method: the PRP coefficient (or none),
the sign safeguard for the diagonal scaling (or the classic scalar
replacement), and the diagonal scaling itself (or the identity).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List

from .core import ConstraintSet, ResidualMap
from .solver import BETA_RULES, SAFEGUARD_RULES, SCALING_RULES, SolverConfig, SolverReport, classic_delta, solve

__all__ = ["VARIANTS", "VariantSpec", "classic_delta", "get_variant", "make_variant", "parse_variants"]


@dataclass(frozen=True)
class VariantSpec:
    name: str
    beta_rule: str = "prp_modified"
    safeguard_rule: str = "case_i_ii"
    scaling_rule: str = "diagonal"

    def __post_init__(self):
        if self.beta_rule not in BETA_RULES:
            raise ValueError(f"unknown beta rule {self.beta_rule!r}")
        if self.safeguard_rule not in SAFEGUARD_RULES:
            raise ValueError(f"unknown safeguard rule {self.safeguard_rule!r}")
        if self.scaling_rule not in SCALING_RULES:
            raise ValueError(f"unknown scaling rule {self.scaling_rule!r}")

    @property
    def rules(self) -> Dict[str, str]:
        return dict(beta_rule=self.beta_rule, safeguard_rule=self.safeguard_rule, scaling_rule=self.scaling_rule)


VARIANTS: Dict[str, VariantSpec] = {
    v.name: v
    for v in (
        VariantSpec("dppm"),
        VariantSpec("dppm-beta0", beta_rule="zero"),
        VariantSpec("dppm-classic-delta", safeguard_rule="classic_delta"),
        VariantSpec("prp-identity", scaling_rule="identity"),
    )
}


def get_variant(name: str) -> VariantSpec:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(VARIANTS)}") from None


def parse_variants(names: Iterable[str] | str) -> List[VariantSpec]:
    if isinstance(names, str):
        names = [s for s in names.split(",") if s.strip()]
    return [get_variant(s.strip()) for s in names]


def make_variant(spec: VariantSpec, cfg: SolverConfig = SolverConfig()) -> Callable[..., SolverReport]:
    """A ``solver(F, omega, x0)`` callable running `spec` under `cfg`."""

    def run(F: ResidualMap, omega: ConstraintSet, x0) -> SolverReport:
        return solve(F, omega, x0, cfg, **spec.rules)

    run.__name__ = spec.name.replace("-", "_")
    run.spec = spec
    return run
