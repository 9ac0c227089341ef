import json
import math

import numpy as np
import pytest

from renyi_qsvt.core import PureStateOracle, make_distribution
from renyi_qsvt.errors import ContractError, ParameterError, PreconditionError
from renyi_qsvt.estimators import C_RATIO, build_large_alpha_schedule
from renyi_qsvt.poly import ChebyshevPoly, certify_bound
from renyi_qsvt.svt import (
    IDEALIZED,
    BranchOutcome,
    DiagonalEncoding,
    StageSchedule,
    apply_svt,
    gapped_separation,
    good_mass,
    run_vst_subroutine,
    schedule_costs,
    separation_amplitudes,
)

X = certify_bound(ChebyshevPoly(np.array([0.0, 1.0]), "odd", label="x"))


@pytest.mark.parametrize("n", [4, 8, 16])
def test_identity_polynomial_gives_collision_probability(n):
    o = PureStateOracle(make_distribution("uniform", n))
    amps = apply_svt(DiagonalEncoding.from_oracle(o), X)
    assert abs(good_mass(amps) - 1.0 / n) <= 1e-12
    assert o.ledger.counted_queries == 1


def test_uncertified_polynomial_is_refused():
    o = PureStateOracle(make_distribution("uniform", 4))
    with pytest.raises(ContractError):
        apply_svt(DiagonalEncoding.from_oracle(o), ChebyshevPoly(np.array([0.0, 1.0]), "odd"))


def test_gapped_separation_clauses():
    b0, b1, deg = gapped_separation(0.1, 0.2, 0.01)
    assert b1 <= 0.01 and deg == 192
    b0, b1, _ = gapped_separation(0.5, 0.2, 0.01)
    assert b0 <= 0.01
    for s in np.linspace(0, 1, 41):
        b0, b1, _ = gapped_separation(float(s), 0.2, 0.01)
        assert b0 * b0 + b1 * b1 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        gapped_separation(0.1, 0.0, 0.01)


def test_idealized_separation_is_worst_case_inside_clauses():
    b0, b1, _ = separation_amplitudes(np.array([0.05, 0.1, 0.2, 0.5]), 0.1, 0.01, IDEALIZED)
    assert b1[:2] == pytest.approx(0.01)
    assert b0[2:] == pytest.approx(0.01)


def test_single_stage_reduces_to_apply_svt():
    d = make_distribution("zipf:s=1", 8)
    sched = StageSchedule(1, 1.0, [X], 0.1, 0.25, X)
    out = run_vst_subroutine(PureStateOracle(d), sched)
    assert out.p_stop == [pytest.approx(1.0, abs=1e-15)]
    mass = good_mass(apply_svt(DiagonalEncoding(np.sqrt(d.probs), PureStateOracle(d)), X))
    assert abs(out.p_succ - mass) <= 1e-12


@pytest.mark.parametrize("kind", ["uniform", "zipf:s=1", "dirac_mixture:w=0.5"])
def test_branch_bookkeeping(kind):
    d = make_distribution(kind, 16)
    from renyi_qsvt.core import exact_power_sum

    _, sched = build_large_alpha_schedule(2.0, 0.05, exact_power_sum(d, 2.0), 1.0, C_RATIO, 16)
    out = run_vst_subroutine(PureStateOracle(d), sched)
    assert math.fsum(out.p_stop) == pytest.approx(1.0, abs=1e-9)
    assert out.T_avg <= out.T_max
    assert out.T_avg ** 2 == pytest.approx(sum(t * t * p for t, p in zip(out.t, out.p_stop)), rel=1e-12)
    # per index, stopped mass and continuation mass add to one
    assert np.allclose(out.stop_weights.sum(axis=1), 1.0, atol=1e-9)
    t, T = schedule_costs(sched)
    assert T == t[-1] and all(a < b for a, b in zip(t, t[1:]))
    back = BranchOutcome.from_json(out.to_json())
    assert set(back) == {"p_succ", "p_stop", "t", "T_avg", "T_max", "mode"}
    assert json.loads(out.to_json())["p_succ"] == out.p_succ


def test_stage_conditions_are_certified():
    _, sched = build_large_alpha_schedule(2.0, 0.2, 1.0, 1.0, math.e, 16)
    assert sched.stage_certs and all(c.passed for c in sched.stage_certs)
    assert sched.thresholds[:3] == [1.0, 0.5, 0.25]


def test_beta_precondition():
    d = make_distribution("dirac", 4)
    sched = StageSchedule(1, 0.5, [X], 0.1, 0.25, X)
    with pytest.raises(PreconditionError):
        run_vst_subroutine(PureStateOracle(d), sched)
