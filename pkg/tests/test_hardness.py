import math

import numpy as np
import pytest

from renyi_qsvt.core import make_distribution
from renyi_qsvt.errors import ParameterError
from renyi_qsvt.hardness import HardInstance, hardness_grid, hellinger, lower_bound_instance, min_instance_size


def test_hellinger_values():
    assert hellinger([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert hellinger([1, 0], [0, 1]) == pytest.approx(1.0)
    assert hellinger([1, 0], [0.5, 0.5]) == pytest.approx(0.5411961001461969)
    with pytest.raises(ParameterError):
        hellinger([1.0], [0.5, 0.5])


def test_hellinger_is_a_metric():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p, q, r = (make_distribution("dirichlet", 6, seed=int(rng.integers(1 << 30))) for _ in range(3))
        assert hellinger(p, q) == pytest.approx(hellinger(q, p))
        assert hellinger(p, r) <= hellinger(p, q) + hellinger(q, r) + 1e-12


def test_instance_values():
    inst = lower_bound_instance(10, 0.5, 0.1)
    assert inst.delta == pytest.approx((0.4 / 3.0) ** 2)  # 0.0177778
    assert inst.entropy_gap >= 2 * inst.eps
    assert inst.hellinger / math.sqrt(inst.delta) == pytest.approx(math.sqrt(0.5), rel=0.05)
    assert inst.q.probs[0] == 1.0 and inst.p.probs.sum() == pytest.approx(1.0)


def test_instance_bound_monotone():
    lbs = [lower_bound_instance(n, 0.5, 0.1).lb_queries for n in (10, 50, 200)]
    assert lbs == sorted(lbs)
    eps = [lower_bound_instance(200, 0.5, e).lb_queries for e in (0.2, 0.1, 0.05)]
    assert eps == sorted(eps)


def test_instance_round_trip():
    inst = lower_bound_instance(50, 0.3, 0.05)
    back = HardInstance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()


def test_instance_errors():
    assert min_instance_size(0.5) == 5.0
    for bad in [(4, 0.5, 0.1), (10, 1.0, 0.1), (10, 0.5, 0.5), (3.5, 0.5, 0.1)]:
        with pytest.raises(ParameterError):
            lower_bound_instance(*bad)


def test_grid_all_valid_points_hold():
    rows = list(hardness_grid())
    assert len(rows) == 27
    valid = [r for r in rows if r[3] is not None]
    assert len(valid) == 24
    for _, _, _, inst in valid:
        assert 0.5 <= inst.hellinger / math.sqrt(inst.delta) <= 1.5


from hypothesis import given, settings, strategies as st


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8), st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
def test_hellinger_bounds_property(w1, w2):
    k = min(len(w1), len(w2))
    p, q = np.array(w1[:k]), np.array(w2[:k])
    h = hellinger(p / p.sum(), q / q.sum())
    assert 0.0 <= h <= 1.0
    assert hellinger(p / p.sum(), p / p.sum()) == pytest.approx(0.0, abs=1e-7)
