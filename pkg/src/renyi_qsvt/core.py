"""Distributions, the pure-state oracle and query accounting."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError, UnsupportedParameterError

SUM_TOL = 1e-12
FILE_RENORM_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteDistribution:
    """Immutable probability vector. ``probs`` is a read-only float64 array."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).ravel()
        if p.size == 0:
            raise ParameterError("distribution must have at least one entry")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ParameterError("probabilities must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > SUM_TOL:
            raise ParameterError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return int(self.probs.size)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.probs))

    def __eq__(self, other):
        return isinstance(other, DiscreteDistribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def tolist(self) -> list[float]:
        return self.probs.tolist()


def _normalized(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    total = math.fsum(w)
    p = w / total
    # Push the rounding residue onto the largest entry so fsum(p) == 1.
    resid = 1.0 - math.fsum(p)
    p[int(np.argmax(p))] += resid
    return p


def _weights(kind: str, n: int, rng: np.random.Generator, params: dict) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=np.float64)
    if kind == "uniform":
        return np.ones(n)
    if kind == "zipf":
        s = float(params.get("s", 1.0))
        if s < 0:
            raise ParameterError("zipf exponent s must be >= 0")
        return i ** (-s)
    if kind == "geometric":
        r = float(params.get("r", 0.5))
        if not 0 < r < 1:
            raise ParameterError("geometric ratio r must lie in (0, 1)")
        return r ** (i - 1)
    if kind == "dirac_mixture":
        w = float(params.get("w", 0.5))
        if not 0 <= w <= 1:
            raise ParameterError("dirac_mixture weight w must lie in [0, 1]")
        out = np.full(n, (1.0 - w) / n)
        out[0] += w
        return out
    if kind == "dirac":
        out = np.zeros(n)
        out[0] = 1.0
        return out
    if kind == "dirichlet":
        conc = float(params.get("concentration", 1.0))
        if conc <= 0:
            raise ParameterError("dirichlet concentration must be > 0")
        return rng.dirichlet(np.full(n, conc))
    if kind == "sparse":
        r = int(params.get("r", 1))
        if not 1 <= r <= n:
            raise ParameterError("sparse support r must satisfy 1 <= r <= n")
        inner = params.get("inner", "uniform")
        inner_params = {k: v for k, v in params.items() if k not in ("r", "inner")}
        inner_w = _weights(inner, r, rng, inner_params)
        if np.count_nonzero(inner_w) != r:
            raise ParameterError("inner distribution of a sparse kind must be strictly positive")
        out = np.zeros(n)
        support = np.sort(rng.choice(n, size=r, replace=False))
        out[support] = inner_w
        return out
    raise ParameterError(f"unknown distribution kind {kind!r}")


def make_distribution(kind: str, n: int | None = None, seed: int = 0, **params) -> DiscreteDistribution:
    """Build a distribution from a named generator.

    ``kind`` is one of uniform, zipf(s), geometric(r), dirac_mixture(w), dirac,
    dirichlet(concentration), sparse(r, inner), explicit(probs).  A compact string
    such as ``"zipf:s=1"`` or ``"sparse:r=4,inner=zipf"`` is also accepted.
    """
    if ":" in kind:
        kind, extra = parse_kind(kind)
        params = {**extra, **params}
    if kind == "explicit":
        probs = params.get("probs")
        if probs is None:
            raise ParameterError("explicit kind needs probs")
        return DiscreteDistribution(np.asarray(probs, dtype=np.float64))
    if n is None or int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    rng = np.random.default_rng(seed)
    return DiscreteDistribution(_normalized(_weights(kind, int(n), rng, params)))


_NUM = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


def parse_kind(spec: str) -> tuple[str, dict]:
    """``"zipf:s=1"`` -> ("zipf", {"s": 1.0}); bare values map to the kind's main parameter."""
    kind, _, rest = spec.partition(":")
    main = {"zipf": "s", "geometric": "r", "dirac_mixture": "w", "sparse": "r", "dirichlet": "concentration"}
    params: dict = {}
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, val = tok.partition("=")
        if not eq:
            key, val = main.get(kind, "value"), tok
        params[key.strip()] = float(val) if _NUM.match(val.strip()) else val.strip()
    if kind == "sparse" and "r" in params:
        params["r"] = int(params["r"])
    return kind, params


def load_distribution(path: str | Path) -> DiscreteDistribution:
    """Read one probability per line. Renormalizes a sum within 1e-9 of 1, rejects otherwise."""
    vals = [float(line) for line in Path(path).read_text().splitlines() if line.strip()]
    total = math.fsum(vals)
    if abs(total - 1.0) > FILE_RENORM_TOL:
        raise ParameterError(f"{path}: probabilities sum to {total!r}")
    if any(v < 0 for v in vals):
        raise ParameterError(f"{path}: negative probability")
    return DiscreteDistribution(_normalized(np.array(vals)))


def save_distribution(dist: DiscreteDistribution, path: str | Path) -> None:
    Path(path).write_text("".join(f"{v!r}\n" for v in dist.probs.tolist()))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise ParameterError("alpha must be a positive finite real")
    return alpha


def exact_power_sum(dist: DiscreteDistribution, alpha: float) -> float:
    """Sum of p_i**alpha with 0**alpha = 0, compensated summation."""
    alpha = _check_alpha(alpha)
    p = dist.probs[dist.probs > 0]
    return math.fsum(np.power(p, alpha))


def exact_entropy(dist: DiscreteDistribution, alpha: float) -> float:
    """Renyi entropy in bits."""
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        raise UnsupportedParameterError("alpha = 1 (Shannon limit) is not supported")
    return math.log2(exact_power_sum(dist, alpha)) / (1.0 - alpha)


@dataclass
class QueryLedger:
    """Counted oracle invocations plus modeled cost; both only ever grow."""

    counted_queries: int = 0
    modeled_queries: float = 0.0

    def charge(self, counted: int = 0, modeled: float = 0.0) -> None:
        if counted < 0 or modeled < 0:
            raise ParameterError("ledger charges must be nonnegative")
        self.counted_queries += int(counted)
        self.modeled_queries += float(modeled)

    def snapshot(self) -> dict:
        return {"counted_queries": self.counted_queries, "modeled_queries": self.modeled_queries}

    def reset(self) -> None:
        """Only between independent trials."""
        self.counted_queries = 0
        self.modeled_queries = 0.0


@dataclass
class PureStateOracle:
    """Preparation oracle with amplitudes sqrt(p_i)."""

    dist: DiscreteDistribution
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.dist.probs)

    def apply(self, times: int = 1) -> np.ndarray:
        """Simulated use of U_pure (or its inverse); charges the ledger."""
        self.ledger.charge(counted=times)
        return self.amplitudes()


@dataclass(frozen=True)
class EstimateReport:
    value: float
    target_kind: str
    alpha: float
    error_budget: float
    error_kind: str
    ledger: dict
    mode: str = "exact_poly"
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.target_kind not in ("power_sum", "entropy"):
            raise ParameterError("target_kind must be power_sum or entropy")
        if self.error_kind not in ("multiplicative", "additive"):
            raise ParameterError("error_kind must be multiplicative or additive")
        if not math.isfinite(self.value):
            raise ParameterError("estimate is not finite")
        if self.target_kind == "power_sum" and not self.value > 0:
            raise ParameterError("power-sum estimate must be positive")


def as_distribution(obj: DiscreteDistribution | Sequence[float]) -> DiscreteDistribution:
    return obj if isinstance(obj, DiscreteDistribution) else DiscreteDistribution(np.asarray(obj, float))
