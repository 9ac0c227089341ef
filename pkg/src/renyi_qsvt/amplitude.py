"""Amplitude estimation outcome law, the rough estimator and the VTAE cost model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy import optimize

from .errors import ParameterError
from .svt import separation_polynomial

FULL_LAW_MAX_M = 1 << 22
WINDOW_HALF_WIDTH = 1 << 16


# ---------------------------------------------------------------------------
# phase-estimation law


def _theta(a: float) -> float:
    return math.asin(math.sqrt(min(1.0, max(0.0, a)))) / math.pi


def _fejer(delta: np.ndarray, M: int) -> np.ndarray:
    """sin^2(M pi d) / (M^2 sin^2(pi d)), equal to 1 at integer d."""
    d = delta - np.round(delta)
    den = np.sin(np.pi * d)
    out = np.ones_like(d)
    nz = np.abs(den) > 1e-300
    out[nz] = (np.sin(M * np.pi * d[nz]) / (M * den[nz])) ** 2
    return out


def qpe_distribution(a: float, M: int) -> np.ndarray:
    """Outcome law over y = 0..M-1 for the eigenphase theta_a = arcsin(sqrt a)/pi."""
    if M < 1 or int(M) != M:
        raise ParameterError("M must be a positive integer")
    if not 0.0 <= a <= 1.0:
        raise ParameterError("a must lie in [0, 1]")
    y = np.arange(int(M))
    return _fejer(_theta(a) - y / M, int(M))


def qpe_distribution_symmetric(a: float, M: int) -> np.ndarray:
    """Law when the input is the initial state (both eigenphases +-theta_a, equal weight)."""
    p = qpe_distribution(a, M)
    return 0.5 * (p + np.roll(p[::-1], 1))


def brute_force_qpe(a: float, M: int, eigenstate: bool = True) -> np.ndarray:
    """Explicit 2-dimensional Grover rotation plus an M-dimensional phase register.

    With ``eigenstate`` the target starts in the e^{+2 pi i theta} eigenvector;
    otherwise it starts in A|0> = cos(pi theta)|bad> + sin(pi theta)|good>.
    """
    th = _theta(a)
    ang = 2.0 * math.pi * th
    Q = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]], dtype=complex)
    if eigenstate:
        w, v = np.linalg.eig(Q)
        psi = v[:, int(np.argmin(np.abs(np.angle(w) - ang)))]
    else:
        psi = np.array([math.cos(math.pi * th), math.sin(math.pi * th)], dtype=complex)
    state = np.zeros((M, 2), dtype=complex)
    cur = psi.copy()
    for k in range(M):
        state[k] = cur / math.sqrt(M)
        cur = Q @ cur
    k = np.arange(M)
    F_inv = np.exp(-2j * np.pi * np.outer(k, k) / M) / math.sqrt(M)
    out = F_inv @ state
    return np.sum(np.abs(out) ** 2, axis=1)


@dataclass(frozen=True)
class AEOutcome:
    estimate: float
    M: int
    queries_charged: int
    y: int = 0


def amplitude_estimate(p_true: float, M: int, rng: np.random.Generator) -> AEOutcome:
    """Draw one amplitude-estimation outcome; queries_charged counts Grover applications."""
    M = int(M)
    if M < 1:
        raise ParameterError("M must be >= 1")
    if M <= FULL_LAW_MAX_M:
        probs = qpe_distribution_symmetric(p_true, M)
        y = int(rng.choice(M, p=probs / probs.sum()))
    else:
        # Outcomes farther than the window from either peak carry < 1e-5 total mass.
        centre = int(round(_theta(p_true) * M))
        offs = np.arange(-WINDOW_HALF_WIDTH, WINDOW_HALF_WIDTH + 1)
        ys = (centre + offs) % M
        w = _fejer(_theta(p_true) - ys / M, M)
        y = int(ys[rng.choice(ys.size, p=w / w.sum())])
        if rng.random() < 0.5:
            y = (M - y) % M
    return AEOutcome(math.sin(math.pi * y / M) ** 2, M, M, y)


def ae_error_bound(p: float, M: int) -> float:
    return 2.0 * math.pi * math.sqrt(p * (1.0 - p)) / M + math.pi ** 2 / M ** 2


def m_basic(P: float, eps: float) -> int:
    """Grover count ceil(5 pi / (sqrt(P) eps)) used after a rough estimate P."""
    return int(math.ceil(5.0 * math.pi / (math.sqrt(P) * eps)))


def m_multiplicative(p: float, eps: float) -> int:
    """ceil(3 pi / (eps sqrt(p))): multiplicative error eps w.p. >= 8/pi^2."""
    return int(math.ceil(3.0 * math.pi / (eps * math.sqrt(p))))


# ---------------------------------------------------------------------------
# rough estimator


class RoughOutcome(NamedTuple):
    estimate: float
    queries_modeled: float
    interval: tuple = (0.0, 1.0)
    tests: int = 0


ROUGH_TEST_EPS = 0.25


def _stop_prob(sigma: float, phi: float, eps: float) -> float:
    R = separation_polynomial(float(phi), float(eps))
    r = float(npcheb.chebval(min(1.0, sigma), R.coeffs)) if sigma <= 1.0 else 0.0
    return max(0.0, 1.0 - r * r)


_THRESH_CACHE: dict = {}


def _threshold(phi: float, eps: float) -> float:
    """Singular value at which one test stops with probability 1/2."""
    key = (phi, eps)
    if key not in _THRESH_CACHE:
        hi = min(2.0 * phi, 1.0)
        f = lambda s: _stop_prob(s, phi, eps) - 0.5
        if f(phi) < 0 < f(hi):
            _THRESH_CACHE[key] = optimize.brentq(f, phi, hi, xtol=1e-14 * phi)
        else:
            _THRESH_CACHE[key] = 1.5 * phi if f(hi) >= 0 else math.inf
    return _THRESH_CACHE[key]


def _reps(steps: int, delta: float, eps: float) -> int:
    """Majority-vote repetitions for per-step failure delta/steps (Hoeffding)."""
    gap = 0.5 - eps * eps
    return max(1, int(math.ceil(math.log(steps / delta) / (2.0 * gap * gap))))


def rough_amplitude_estimate(p_true: float, L: float, delta: float, rng: np.random.Generator,
                             test_eps: float = ROUGH_TEST_EPS, refine: int = 2) -> RoughOutcome:
    """Constant-factor estimate of p_true from doubling gapped tests on sqrt(p_true).

    Gapped tests at phi = 1, 1/2, ... locate sqrt(p) between consecutive empirical
    thresholds; ``refine`` further tests bisect that bracket on a log scale.  The
    output is the square of the bracket's geometric midpoint.  ``rng=None`` replaces
    each vote by its noise-free majority.
    """
    if not 0.0 < L <= 1.0:
        raise ParameterError("L must lie in (0, 1]")
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    sigma = math.sqrt(max(0.0, p_true))
    K = max(1, int(math.ceil(math.log2(1.0 / L))))
    steps = K + 1 + refine
    r = _reps(steps, delta, test_eps)
    cost, tests = 0.0, 0

    def verdict(phi):
        nonlocal cost, tests
        R = separation_polynomial(float(phi), float(test_eps))
        cost += r * R.degree
        tests += 1
        q = _stop_prob(sigma, phi, test_eps)
        if rng is None:  # noise-free: the majority vote's limiting verdict
            return q > 0.5
        return rng.binomial(r, q) * 2 > r

    hit = None
    for j in range(K + 1):
        phi = 2.0 ** (-j)
        if verdict(phi):
            hit = phi
            break
    if hit is None:
        hit = 2.0 ** (-K - 1)
    lo_phi, hi_phi = hit, 2.0 * hit
    for _ in range(refine):
        mid = math.sqrt(lo_phi * hi_phi)
        if mid > 1.0:
            break
        if verdict(mid):
            lo_phi = mid
        else:
            hi_phi = mid
    lo = _threshold(lo_phi, test_eps) if lo_phi <= 1.0 else 1.0
    hi = min(1.0, _threshold(hi_phi, test_eps)) if hi_phi <= 1.0 else 1.0
    lo = min(lo, hi)
    est = lo * hi  # (sqrt(lo*hi))^2
    return RoughOutcome(est, cost, (lo * lo, hi * hi), tests)


def rough_cost_formula(p: float, L: float, delta: float) -> float:
    """(1/sqrt p) log2(1/sqrt p) log2(log2(1/L)/delta); logs floored at 1."""
    s = math.sqrt(p)
    return (1.0 / s) * max(1.0, math.log2(1.0 / s)) * max(1.0, math.log2(max(1.0, math.log2(1.0 / L)) / delta))


# ---------------------------------------------------------------------------
# VTAE cost


@dataclass(frozen=True)
class VtaeCostInputs:
    T_max: float
    T_avg: float
    p_succ: float
    t_1: float
    eps: float
    delta: float
    p_succ_lower: float | None = None

    def __post_init__(self):
        for name in ("T_max", "T_avg", "t_1", "eps", "delta"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if not 0 < self.p_succ <= 1:
            raise ParameterError("p_succ must lie in (0, 1]")


def vtae_cost(inp: VtaeCostInputs) -> float:
    """Modeled query count with hidden constants set to 1 (log base 2)."""
    Tp = 2.0 * inp.T_max / inp.t_1
    lg = math.log2(Tp)
    p_low = inp.p_succ if inp.p_succ_lower is None else inp.p_succ_lower
    Q = inp.T_max * math.sqrt(lg) + inp.T_avg * lg / math.sqrt(inp.p_succ)
    first = (Q / inp.eps) * lg ** 2 * math.log2(lg / inp.delta)
    second = Q * lg * math.log2((1.0 / inp.delta) * math.log2(Tp / p_low))
    return first + second
