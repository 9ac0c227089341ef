"""Amplitude-level singular value transformation on the diagonal encoding.

The encoding of a distribution p has singular values sqrt(p_i); a parity-definite
polynomial S with |S| <= 1 maps the flagged amplitude of index i to
sqrt(p_i) * S(sqrt(p_i)).  The variable-stopping-time subroutine is tracked branch
by branch, so success and stopping probabilities are exact for the materialized
polynomials.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Protocol, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .core import PureStateOracle
from .errors import ContractError, ParameterError, PreconditionError
from .poly import (
    ChebyshevPoly,
    CertEntry,
    approx_rectangle,
    certify,
    rectangle_degree_formula,
)

EXACT = "exact_poly"
IDEALIZED = "idealized"


class StageTransform(Protocol):
    degree: int
    parity: str

    def __call__(self, x): ...


@dataclass(frozen=True)
class IdealTransform:
    """Target function standing in for a polynomial too large to materialize."""

    fn: Callable[[np.ndarray], np.ndarray]
    degree: int
    parity: str
    label: str = ""

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def _values(S, x: np.ndarray) -> np.ndarray:
    if isinstance(S, ChebyshevPoly):
        return npcheb.chebval(x, S.coeffs)
    return np.asarray(S(x), dtype=float)


@dataclass(frozen=True)
class DiagonalEncoding:
    sigmas: np.ndarray
    source: PureStateOracle
    oracle_cost_per_use: int = 1

    @classmethod
    def from_oracle(cls, oracle: PureStateOracle) -> "DiagonalEncoding":
        return cls(np.sqrt(oracle.dist.probs), oracle)

    def __post_init__(self):
        s = np.asarray(self.sigmas, float)
        if np.any(s < 0) or np.any(s > 1):
            raise ParameterError("singular values must lie in [0, 1]")
        if abs(math.fsum(s * s) - 1.0) > 1e-12:
            raise ParameterError("squared singular values must sum to 1")


def _require_certified(S) -> None:
    if isinstance(S, IdealTransform):
        return
    if not isinstance(S, ChebyshevPoly) or not S.certified:
        raise ContractError("polynomial lacks a passing certificate")
    if not any(e.description == "|P|<=1" and e.interval == (-1.0, 1.0) and e.passed for e in S.cert.entries):
        raise ContractError("certificate does not include the unit bound on [-1, 1]")


def apply_svt(enc: DiagonalEncoding, S: ChebyshevPoly) -> np.ndarray:
    """Flagged amplitudes sqrt(p_i) S(sqrt(p_i)); charges deg(S) queries."""
    _require_certified(S)
    enc.source.ledger.charge(counted=S.degree * enc.oracle_cost_per_use)
    return enc.sigmas * _values(S, enc.sigmas)


def good_mass(amplitudes: np.ndarray) -> float:
    return math.fsum(np.asarray(amplitudes) ** 2)


# ---------------------------------------------------------------------------
# gapped separation


@lru_cache(maxsize=512)
def separation_polynomial(phi: float, eps: float) -> ChebyshevPoly:
    """Rectangle with edges phi/2 around 3 phi/2 at precision eps^2/2."""
    return approx_rectangle(phi / 2.0, eps * eps / 2.0, 1.5 * phi)


# Monte-Carlo trials re-run the same schedule on the same distribution.
_SEP_CACHE: dict = {}
_SEP_CACHE_SIZE = 4096


def separation_amplitudes(sigmas: np.ndarray, phi: float, eps: float, mode: str = EXACT):
    """Vectorized (beta0, beta1, degree) for many singular values."""
    sig = np.asarray(sigmas, float)
    if mode == IDEALIZED:
        # Worst leak inside the clauses, linear in beta1^2 across the gap.
        frac = np.clip((sig - phi) / phi, 0.0, 1.0)
        b1sq = eps * eps + (1.0 - 2.0 * eps * eps) * frac
        deg = int(math.ceil(math.log2(1.0 / eps) / phi))
        return np.sqrt(1.0 - b1sq), np.sqrt(b1sq), deg
    key = (float(phi), float(eps), sig.tobytes())
    hit = _SEP_CACHE.get(key)
    if hit is None:
        R = separation_polynomial(float(phi), float(eps))
        b0 = npcheb.chebval(sig, R.coeffs)
        b1 = np.sqrt(np.maximum(0.0, 1.0 - b0 * b0))
        if len(_SEP_CACHE) >= _SEP_CACHE_SIZE:
            _SEP_CACHE.pop(next(iter(_SEP_CACHE)))
        hit = _SEP_CACHE[key] = (b0, b1, R.degree)
    b0, b1, deg = hit
    return b0.copy(), b1.copy(), deg


def gapped_separation(sigma: float, phi: float, eps: float) -> tuple[float, float, int]:
    """(beta0, beta1, degree): beta1 is the stop amplitude, small when sigma <= phi."""
    if not 0.0 <= sigma <= 1.0:
        raise ParameterError("sigma must lie in [0, 1]")
    if not 0.0 < phi <= 1.0:
        raise ParameterError("phi must lie in (0, 1]")
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie in (0, 1)")
    b0, b1, deg = separation_amplitudes(np.array([sigma]), phi, eps)
    return float(b0[0]), float(b1[0]), deg


def separation_degree_formula(phi: float, eps: float) -> float:
    return math.log2(1.0 / eps) / phi


# ---------------------------------------------------------------------------
# schedules


@dataclass
class StageSchedule:
    m: int
    beta: float
    stage_polys: list
    L: float
    eps: float
    target_poly: object
    mode: str = EXACT
    stage_certs: list = field(default_factory=list)

    def __post_init__(self):
        if self.m < 1 or len(self.stage_polys) != self.m:
            raise ParameterError("need exactly m stage polynomials")
        if not 0 < self.beta <= 1:
            raise ParameterError("beta must lie in (0, 1]")
        if not self.L > 0 or not 0 < self.eps < 1:
            raise ParameterError("L must be positive and eps in (0, 1)")

    @property
    def thresholds(self) -> list[float]:
        return [self.beta * 2.0 ** (-j) for j in range(self.m)] + [0.0]

    @property
    def separation_eps(self) -> float:
        return self.L * self.eps / self.m

    def validity_interval(self, j: int) -> tuple[float, float]:
        """Interval on which S_j must track S (1-based j)."""
        if j == 1:
            return (self.beta / 2.0, self.beta)
        return (self.beta * 2.0 ** (-j), min(1.0, self.beta * 2.0 ** (-j + 2)))

    def certify_stage_conditions(self, grid: int = 10_000) -> list[CertEntry]:
        """|S_j - S| <= L eps on each validity interval; appended to stage_certs."""
        if self.mode != EXACT:
            return []
        S = self.target_poly
        out = []
        for j, Sj in enumerate(self.stage_polys, start=1):
            _require_certified(Sj)
            n = max(Sj.coeffs.size, S.coeffs.size)
            diff = np.zeros(n)
            diff[: Sj.coeffs.size] += Sj.coeffs
            diff[: S.coeffs.size] -= S.coeffs
            dpoly = ChebyshevPoly(diff, Sj.parity)
            lo, hi = self.validity_interval(j)
            out.append(certify(dpoly, (lo, hi), None, "abs", grid=grid, bound=self.L * self.eps,
                               description=f"|S_{j}-S|<=L*eps"))
        self.stage_certs = out
        return out


def schedule_costs(sched: StageSchedule) -> tuple[list[float], float]:
    """t_j = (2^j/beta) log2(m/(eps L)) + sum_{k<=j} deg S_k, and T_max = t_m."""
    sep_log = math.log2(1.0 / sched.separation_eps)
    t, acc = [], 0
    for j, Sj in enumerate(sched.stage_polys, start=1):
        acc += Sj.degree
        t.append(2.0 ** j / sched.beta * sep_log + acc)
    return t, t[-1]


@dataclass
class BranchOutcome:
    p_succ: float
    p_stop: list[float]
    stop_amp_sq_good: np.ndarray
    t: list[float]
    T_avg: float
    T_max: float
    discarded: np.ndarray
    stop_weights: np.ndarray
    t_actual: list[float]
    mode: str = EXACT

    def to_json(self) -> str:
        return json.dumps({"p_succ": self.p_succ, "p_stop": self.p_stop, "t": self.t,
                           "T_avg": self.T_avg, "T_max": self.T_max, "mode": self.mode})

    @classmethod
    def from_json(cls, text: str) -> dict:
        return json.loads(text)


def run_vst_subroutine(oracle: PureStateOracle, sched: StageSchedule, charge: bool = True) -> BranchOutcome:
    """Exact branch bookkeeping of the m-stage variable-stopping-time subroutine."""
    p = oracle.dist.probs
    sig = np.sqrt(p)
    if float(np.max(sig)) > sched.beta * (1.0 + 1e-12):
        raise PreconditionError("beta is below the largest singular value")
    m, phis, eps_sep = sched.m, sched.thresholds, sched.separation_eps
    n = sig.size
    cont = np.ones(n)  # a_{k-1}
    w = np.zeros((n, m))  # |a_{k-1} beta1^{(i,k)}|^2
    good = np.zeros((n, m))
    sep_deg = []
    for k in range(1, m + 1):
        if k < m:
            b0, b1, deg = separation_amplitudes(sig, phis[k], eps_sep, sched.mode)
        else:
            b0, b1, deg = np.zeros(n), np.ones(n), 0
        sep_deg.append(deg)
        w[:, k - 1] = (cont * b1) ** 2
        Sk = _values(sched.stage_polys[k - 1], sig)
        good[:, k - 1] = w[:, k - 1] * Sk * Sk
        cont = cont * b0
    p_stop = [math.fsum(p * w[:, k]) for k in range(m)]
    p_succ = math.fsum((p[:, None] * good).ravel())
    t, T_max = schedule_costs(sched)
    T_avg = math.sqrt(math.fsum(tj * tj * ps for tj, ps in zip(t, p_stop)))
    T_avg = min(T_avg, T_max)  # rounding only
    acc, t_actual = 0, []
    for k in range(m):
        acc += sep_deg[k] + sched.stage_polys[k].degree
        t_actual.append(float(acc))
    if charge:
        oracle.ledger.charge(counted=int(t_actual[-1]))
    return BranchOutcome(p_succ, p_stop, good, t, T_avg, T_max, (w - good).sum(axis=1), w, t_actual, sched.mode)
