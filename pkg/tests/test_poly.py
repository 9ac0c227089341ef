import math

import numpy as np
import pytest

from renyi_qsvt.errors import DomainError, ParameterError
from renyi_qsvt.poly import (
    ChebyshevPoly,
    approx_bounded_power,
    approx_bounded_power_parts,
    approx_neg_power,
    approx_rectangle,
    bounded_power_target,
    certify,
    chebyshev_basis,
    eval_poly,
    rectangle_degree_formula,
)


@pytest.mark.parametrize("k,x,val", [(1, 0.3, 0.3), (2, 0.5, -0.5), (3, 0.2, 4 * 0.2 ** 3 - 3 * 0.2)])
def test_basis_evaluation(k, x, val):
    assert eval_poly(chebyshev_basis(k), x) == pytest.approx(val, abs=1e-15)


def test_eval_domain():
    with pytest.raises(DomainError):
        eval_poly(chebyshev_basis(1), 1.5)


def test_parity_and_trimming_invariants():
    p = ChebyshevPoly(np.array([1.0, 2.0, 3.0, 0.0, 0.0]), "even")
    assert p.coeffs.tolist() == [1.0, 0.0, 3.0]
    assert p.degree == 2
    with pytest.raises(ParameterError):
        ChebyshevPoly(np.array([1.0]), "neither")


def test_dump_round_trip_is_bit_exact(tmp_path):
    p = approx_neg_power(0.5, 0.2, 1e-4, "odd")
    text = p.dumps()
    assert text.splitlines()[0] == f"chebyshev parity=odd degree={p.degree}"
    q = ChebyshevPoly.loads(text)
    assert np.array_equal(q.coeffs, p.coeffs) and q.parity == "odd"
    p.dump(tmp_path / "c.txt")
    assert np.array_equal(ChebyshevPoly.load(tmp_path / "c.txt").coeffs, p.coeffs)


def test_certify_examples():
    t1 = chebyshev_basis(1)
    e = certify(t1, (-1, 1), 1.0, "abs")
    assert e.passed and e.worst == 1.0
    e2 = certify(ChebyshevPoly(np.array([0.0, 2.0]), "odd"), (-1, 1), 1.0, "abs")
    assert not e2.passed and e2.worst == 2.0
    R = approx_rectangle(0.1, 0.01, 0.3)
    assert certify(R, (0.4, 1.0), 0.01, "abs").passed
    with pytest.raises(ParameterError):
        certify(t1, (-1, 1), 1.0, "abs", grid=100)
    with pytest.raises(ParameterError):
        certify(t1, (-2, 1), 1.0, "abs")


def test_rectangle_examples():
    R = approx_rectangle(0.1, 0.01, 0.3)
    assert R.parity == "even" and R.certified
    assert 0.99 <= R(0.0) <= 1.0
    assert 0.0 <= R(0.5) <= 0.01
    assert R.degree == 96  # frozen regression value
    xs = np.random.default_rng(0).uniform(-1, 1, 100)
    assert np.array_equal(R(xs), R(-xs))
    assert R.degree <= 64 * rectangle_degree_formula(0.1, 0.01)


def test_neg_power_examples():
    P = approx_neg_power(1, 0.5, 0.05, "even")
    assert 0.20 <= P(1.0) <= 0.30
    assert 0.45 <= P(0.5) <= 0.55
    assert P(1.0) == pytest.approx(0.24862409796201446, abs=1e-12)
    grid = np.linspace(-1, 1, 20001)
    assert np.max(np.abs(P(grid))) <= 1 + 1e-9
    K = P.cert.K
    assert np.isfinite(K) and K > 0


def test_neg_power_zero_exponent_and_ranges():
    assert approx_neg_power(0, 0.3, 0.1).coeffs.tolist() == [0.5]
    for bad in [dict(c=-1, delta=0.3, eps=0.1), dict(c=1, delta=0.0, eps=0.1), dict(c=1, delta=0.3, eps=0.9)]:
        with pytest.raises(ParameterError):
            approx_neg_power(**bad)


def test_bounded_power_examples():
    S = approx_bounded_power(1.5, 0.5, 0.1, 0.01)
    f = bounded_power_target(1.5, 0.5)
    assert abs(S(0.05)) <= 2 * f(0.05) == pytest.approx(0.011180, abs=1e-6)
    assert abs(S(0.3) - f(0.3)) <= 0.01
    assert S.parity == "even"  # ceil(1.5) = 2
    assert approx_bounded_power(1.0, 0.8, 0.2, 0.01).parity == "odd"


def test_bounded_power_composition_identity():
    parts = approx_bounded_power_parts(1.5, 0.5, 0.1, 0.01)
    xs = np.random.default_rng(1).uniform(-1, 1, 1000)
    rebuilt = parts.multiplier * xs ** parts.power * parts.Q(xs) * parts.P(xs)
    assert np.max(np.abs(parts.S(xs) - rebuilt)) <= 1e-10


@pytest.mark.parametrize("builder", [
    lambda: approx_rectangle(0.05, 1e-6, 0.4),
    lambda: approx_neg_power(0.7, 0.05, 1e-5, "odd"),
    lambda: approx_neg_power(2.0, 0.1, 1e-4, "even"),
    lambda: approx_bounded_power(2.5, 0.9, 0.1, 1e-4),
])
def test_parity_symmetry(builder):
    P = builder()
    xs = np.random.default_rng(2).uniform(-1, 1, 1000)
    sign = 1.0 if P.parity == "even" else -1.0
    assert np.max(np.abs(P(-xs) - sign * P(xs))) <= 1e-12
