import math

import numpy as np
import pytest

from dppm.baselines import VARIANTS, VariantSpec, classic_delta, get_variant, make_variant, parse_variants
from dppm.core import ConstraintSet, ResidualMap
from dppm.problems import make_initial_point, make_problem
from dppm.solver import SolverConfig, _scaling_classic, solve

CFG = SolverConfig()


def vec(*xs):
    return np.array(xs, dtype=float)


def test_classic_delta_examples():
    assert classic_delta(vec(1, 1), vec(2, 4)) == 3.0
    s = vec(0.3, -2.0, 5.0)
    assert classic_delta(s, s.copy()) == 1.0
    assert classic_delta(vec(1, -1), vec(1, 1)) == 0.0
    assert classic_delta(np.zeros(3), vec(1, 2, 3)) == 1.0


def test_classic_delta_substitution_is_clipped():
    # delta = 0 replaces the nonpositive ratio, then the lower clip applies
    lam = _scaling_classic(vec(1, -1), vec(1, 1), CFG)
    assert lam.tolist() == [1.0, CFG.ell]
    lam = _scaling_classic(vec(1, 1, 0), vec(2, -4, 7), SolverConfig(u=10.0))
    assert lam.tolist() == [2.0, CFG.ell, 1.0]


def test_variant_registry():
    assert list(VARIANTS) == ["dppm", "dppm-beta0", "dppm-classic-delta", "prp-identity"]
    combos = {tuple(v.rules.values()) for v in VARIANTS.values()}
    assert len(combos) == len(VARIANTS)
    assert [v.name for v in parse_variants("dppm, prp-identity")] == ["dppm", "prp-identity"]
    with pytest.raises(ValueError):
        get_variant("mdyp")
    with pytest.raises(ValueError):
        VariantSpec("bad", beta_rule="dy")


def test_dppm_variant_is_bit_exact():
    p = make_problem(3, 100)
    x0 = make_initial_point("x2", 100)
    a = make_variant(get_variant("dppm"))(p.residual(), p.constraint, x0)
    b = solve(p.residual(), p.constraint, x0)
    assert a.solution.tobytes() == b.solution.tobytes()
    assert (a.iters, a.fevals, a.final_norm) == (b.iters, b.fevals, b.final_norm)


def test_beta0_on_identity():
    F = ResidualMap(lambda x: x.copy(), 10)
    r = make_variant(get_variant("dppm-beta0"))(F, ConstraintSet.whole_space(), np.ones(10))
    assert r.converged
    for rec in r.trace:
        assert rec.beta == 0.0
        assert rec.descent_value <= -(1 / CFG.u) * rec.residual_norm**2


def test_classic_delta_variant_converges_on_problem3():
    p = make_problem(3, 1000)
    r = make_variant(get_variant("dppm-classic-delta"))(p.residual(), p.constraint, make_initial_point("x1", 1000))
    assert r.converged and r.iters <= 1000 and r.final_norm <= 1e-5


@pytest.mark.parametrize("name", list(VARIANTS))
@pytest.mark.parametrize("pid", [2, 3, 4, 5])
def test_variant_invariants(name, pid):
    n = 100
    p = make_problem(pid, n)
    run = make_variant(get_variant(name))
    for init in ("x1", "x2", "x6", "x8"):
        F = p.residual()
        r = run(F, p.constraint, make_initial_point(init, n))
        assert r.fevals == F.eval_count
        assert p.constraint.contains(r.solution)
        for rec in r.trace:
            assert rec.beta >= 0.0
            assert CFG.ell <= rec.lambda_min <= rec.lambda_max <= CFG.u
            if get_variant(name).beta_rule == "zero":
                assert rec.beta == 0.0 and rec.branch == "pure_diagonal"
            if rec.step_kind == "projection":
                assert rec.x_next_norm <= rec.x_norm * (1 + 1e-12)
            if rec.step_kind == "projection" and not math.isnan(rec.min_safeguarded_ratio):
                assert rec.min_safeguarded_ratio > 0.0


def test_identity_variant_keeps_unit_scaling():
    p = make_problem(5, 50)
    r = make_variant(get_variant("prp-identity"))(p.residual(), p.constraint, make_initial_point("x1", 50))
    assert all(rec.lambda_min == rec.lambda_max == 1.0 for rec in r.trace)
