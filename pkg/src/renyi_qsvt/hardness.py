"""Hellinger distance and the hard instance behind the alpha < 1 query lower bound.

Lower bounds are reported with constant 1: they give the scale of the Omega(.)
statement, not an absolute count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import DiscreteDistribution, as_distribution, exact_entropy
from .errors import ParameterError


def hellinger(p, q) -> float:
    """sqrt(sum (sqrt p_i - sqrt q_i)^2 / 2)."""
    p, q = as_distribution(p), as_distribution(q)
    if p.n != q.n:
        raise ParameterError("distributions must have equal cardinality")
    d = np.sqrt(p.probs) - np.sqrt(q.probs)
    return min(1.0, math.sqrt(math.fsum(d * d) / 2.0))


@dataclass(frozen=True)
class HardInstance:
    p: DiscreteDistribution
    q: DiscreteDistribution
    delta: float
    entropy_gap: float
    hellinger: float
    lb_queries: float
    lb_queries_hellinger: float
    n: int
    alpha: float
    eps: float

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "alpha": self.alpha, "eps": self.eps, "delta": self.delta,
            "entropy_gap": self.entropy_gap, "hellinger": self.hellinger,
            "lb_queries": self.lb_queries, "lb_queries_hellinger": self.lb_queries_hellinger,
            "p": self.p.tolist(), "q": self.q.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "HardInstance":
        d = json.loads(text)
        return cls(DiscreteDistribution(d["p"]), DiscreteDistribution(d["q"]), d["delta"], d["entropy_gap"],
                   d["hellinger"], d["lb_queries"], d["lb_queries_hellinger"], d["n"], d["alpha"], d["eps"])


def min_instance_size(alpha: float) -> float:
    return 1.0 + 2.0 ** (1.0 / (1.0 - alpha))


def lower_bound_instance(n: int, alpha: float, eps: float) -> HardInstance:
    """p = (1 - delta, delta/(n-1), ...) against the point mass q."""
    if int(n) != n or n < 2:
        raise ParameterError("n must be an integer >= 2")
    n = int(n)
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    if not 0 < eps < 0.5:
        raise ParameterError("eps must lie in (0, 1/2)")
    if n < min_instance_size(alpha):
        raise ParameterError(f"need n >= 1 + 2^(1/(1-alpha)) = {min_instance_size(alpha):.6g}")
    delta = (4.0 * eps / (n - 1) ** (1.0 - alpha)) ** (1.0 / alpha)
    if not delta < 1.0:
        raise ParameterError(f"mass parameter delta = {delta:.6g} is not below 1")
    probs = np.full(n, delta / (n - 1))
    probs[0] = 1.0 - delta
    p = DiscreteDistribution(probs)
    q_probs = np.zeros(n)
    q_probs[0] = 1.0
    q = DiscreteDistribution(q_probs)
    gap = abs(exact_entropy(q, alpha) - exact_entropy(p, alpha))
    if gap < 2.0 * eps:
        raise ParameterError(f"entropy gap {gap:.6g} below 2 eps")
    dh = hellinger(p, q)
    lb = n ** (1.0 / (2.0 * alpha) - 0.5) / eps ** (1.0 / (2.0 * alpha))
    return HardInstance(p, q, delta, gap, dh, lb, 1.0 / dh, n, float(alpha), float(eps))


HARDNESS_GRID = {"n": (10, 50, 200), "alpha": (0.3, 0.5, 0.8), "eps": (0.05, 0.1, 0.2)}


def hardness_grid(grid: dict = HARDNESS_GRID):
    """Yield (n, alpha, eps, instance or None) over the grid; None where the precondition fails."""
    for n in grid["n"]:
        for a in grid["alpha"]:
            for e in grid["eps"]:
                try:
                    inst = lower_bound_instance(n, a, e)
                except ParameterError:
                    inst = None
                yield n, a, e, inst
