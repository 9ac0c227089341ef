"""End-to-end power-sum and Renyi-entropy estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .amplitude import (
    amplitude_estimate,
    m_basic,
    m_multiplicative,
    rough_amplitude_estimate,
    VtaeCostInputs,
    vtae_cost,
)
from .core import EstimateReport, PureStateOracle, exact_power_sum
from .errors import ParameterError, PreconditionError, UnsupportedParameterError
from .poly import (
    ChebyshevPoly,
    DegreeBudgetExceeded,
    approx_bounded_power,
    approx_neg_power,
    bounded_power_target,
    certify_bound,
    scaled,
)
from .svt import (
    EXACT,
    IDEALIZED,
    DiagonalEncoding,
    IdealTransform,
    StageSchedule,
    apply_svt,
    good_mass,
    run_vst_subroutine,
)

C_RATIO = 4.0 * math.e ** 2
ALPHA_GAP = 1e-3


def _check_alpha(alpha: float, side: str | None = None) -> float:
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if abs(alpha - 1.0) < ALPHA_GAP:
        raise UnsupportedParameterError(f"|alpha - 1| must be at least {ALPHA_GAP}")
    if side == "large" and alpha <= 1:
        raise ParameterError("this pipeline needs alpha > 1")
    if side == "small" and alpha >= 1:
        raise ParameterError("this pipeline needs alpha in (0, 1)")
    return alpha


def _check_eps(eps: float) -> float:
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    return float(eps)


def _positive_grid_value(est: float, M: int) -> tuple[float, bool]:
    """Power sums are positive; an all-zero AE outcome is lifted to half a grid step."""
    if est > 0:
        return est, False
    return math.sin(math.pi / (2 * M)) ** 2, True


def _estimate_amplitude(p: float, L: float, eps: float, rng, noise_free: bool, repetitions: int):
    """AE surrogate at multiplicative eps using the known lower bound L; median of repetitions."""
    M = m_multiplicative(L, eps)
    if noise_free:
        return p, M, 0
    draws = [amplitude_estimate(p, M, rng).estimate for _ in range(max(1, repetitions))]
    return float(np.median(draws)), M, len(draws)


# ---------------------------------------------------------------------------
# single-shot estimate


def estimate_power_sum_basic(oracle: PureStateOracle, S: ChebyshevPoly, L: float, eps: float,
                             rng: np.random.Generator | None = None, noise_free: bool = False,
                             alpha: float = float("nan"), check: bool = True) -> EstimateReport:
    """Rough estimate (delta = 1/8) then AE with M = ceil(5 pi / (sqrt(P) eps))."""
    eps = _check_eps(eps)
    enc = DiagonalEncoding.from_oracle(oracle)
    p = good_mass(apply_svt(enc, S))
    if check and L > p * (1.0 + 1e-12):
        raise PreconditionError(f"L = {L} exceeds the flagged mass {p}")
    if noise_free:
        rough = rough_amplitude_estimate(p, L, 1.0 / 8.0, None)
    else:
        rough = rough_amplitude_estimate(p, L, 1.0 / 8.0, rng)
    M = m_basic(rough.estimate, eps)
    if noise_free:
        est, clamped = p, False
    else:
        est, clamped = _positive_grid_value(amplitude_estimate(p, M, rng).estimate, M)
    # Each use of the transformed unitary costs deg(S) oracle calls.
    uses = rough.queries_modeled + M
    oracle.ledger.charge(counted=int(round(uses * S.degree)), modeled=uses * S.degree)
    return EstimateReport(est, "power_sum", alpha, eps, "multiplicative", oracle.ledger.snapshot(),
                          details={"p_exact": p, "rough": rough.estimate, "M": M, "clamped": clamped})


# ---------------------------------------------------------------------------
# alpha > 1


@dataclass(frozen=True)
class LargeAlphaParams:
    alpha: float
    eps: float
    P: float
    a: float
    b: float
    n: int
    p_star: float
    beta0: float
    nu0: float
    m0: int
    L: float
    rescale: float
    nus: tuple

    @property
    def c(self) -> float:
        return self.alpha - 1.0

    @property
    def eta(self) -> float:
        return self.L * self.eps / 4.0


def large_alpha_params(alpha, eps, P, a, b, n, nu0_override=None) -> LargeAlphaParams:
    alpha = _check_alpha(alpha, "large")
    eps = _check_eps(eps)
    if not (P > 0 and a > 0 and b >= a):
        raise ParameterError("need P > 0 and 0 < a <= b")
    p_star = min(P / a, 1.0) ** (1.0 / alpha)
    beta0 = math.sqrt(p_star)
    if nu0_override is None:
        nu0 = (0.25 * a * p_star ** alpha * eps / (5.0 * b * n)) ** (1.0 / (2.0 * alpha))
    else:
        nu0 = float(nu0_override)
    if not nu0 > 0:
        raise ParameterError("nu0 underflowed to zero")
    m0 = max(2, int(math.ceil(math.log2(beta0 / nu0))) + 1)
    nus = [beta0 * 2.0 ** (-j) for j in range(1, m0)]
    nus.append(nus[-1])
    L = (a / b) * 2.0 ** (-2.0 * alpha - 1.0) * p_star
    rescale = 2.0 ** (2.0 * alpha) * p_star ** (alpha - 1.0)
    return LargeAlphaParams(alpha, eps, P, a, b, n, p_star, beta0, nu0, m0, L, rescale, tuple(nus))


def _large_alpha_ideal(c, beta, nu, eta):
    k = math.ceil(c)
    d = k - c
    eq = beta ** c * nu ** d * eta / 2.0
    deg = k + max(1.0, d) / nu * math.log2(1.0 / eq) + math.log2(1.0 / eq) / (beta / 2.0)
    f = bounded_power_target(c, beta)

    def fn(x):
        fx = f(x)
        return np.where(np.abs(x) >= nu, np.minimum(1.0, fx + eta), np.minimum(2.0 * fx, fx + eta))

    return IdealTransform(fn, int(math.ceil(deg)), "even" if k % 2 == 0 else "odd", f"ideal-bpow({c:g},{nu:g})")


def unknown_support_nu0(alpha, eps, P, a, b) -> float:
    """min(beta0/2, ((a/b) P eps / 5)^{1/(2 alpha - 2)}); no dependence on n or r."""
    beta0 = math.sqrt(min(P / a, 1.0) ** (1.0 / alpha))
    return min(beta0 / 2.0, ((a / b) * P * eps / 5.0) ** (1.0 / (2.0 * alpha - 2.0)))


@lru_cache(maxsize=256)
def _bounded_power_cached(c, beta, nu, eta):
    return approx_bounded_power(c, beta, nu, eta)


@lru_cache(maxsize=128)
def build_large_alpha_schedule(alpha, eps, P, a, b, n, mode: str = EXACT, nu0_override=None):
    """Stage polynomials S_j = bounded power (c = alpha - 1, beta0, nu_j, L eps / 4)."""
    prm = large_alpha_params(alpha, eps, P, a, b, n, nu0_override)
    polys, used = None, mode
    if mode == EXACT:
        try:
            polys = [_bounded_power_cached(prm.c, prm.beta0, nu, prm.eta) for nu in prm.nus]
        except DegreeBudgetExceeded:
            used = IDEALIZED
    if polys is None:
        polys = [_large_alpha_ideal(prm.c, prm.beta0, nu, prm.eta) for nu in prm.nus]
    sched = StageSchedule(prm.m0, prm.beta0, polys, prm.L, prm.eps, polys[-1], used)
    sched.certify_stage_conditions()
    return prm, sched


def _run_stopped_estimate(oracle, prm, sched, eps_ae, delta, rng, noise_free, repetitions):
    out = run_vst_subroutine(oracle, sched)
    if noise_free:
        p_t, M, reps = out.p_succ, m_multiplicative(sched.L, eps_ae), 0
    else:
        p_t, M, reps = _estimate_amplitude(out.p_succ, sched.L, eps_ae, rng, noise_free, repetitions)
    p_t, clamped = _positive_grid_value(p_t, M)
    modeled = vtae_cost(VtaeCostInputs(out.T_max, out.T_avg, max(out.p_succ, 1e-300), out.t[0], eps_ae,
                                       delta, p_succ_lower=sched.L))
    oracle.ledger.charge(counted=int(M * out.t_actual[-1]) * max(1, reps), modeled=modeled)
    return out, p_t, M, modeled, clamped


def estimate_power_sum_large_alpha(oracle: PureStateOracle, alpha, eps, delta, P, a, b,
                                   rng=None, noise_free=False, mode: str = EXACT, n: int | None = None,
                                   repetitions: int = 1, nu0_override=None) -> EstimateReport:
    """Multiplicative-eps estimate of P_alpha given a rough triple a P_alpha <= P <= b P_alpha."""
    eps = _check_eps(eps)
    n_eff = oracle.dist.n if n is None else int(n)
    prm, sched = build_large_alpha_schedule(float(alpha), eps / 5.0, float(P), float(a), float(b), n_eff,
                                            mode, nu0_override)
    out, p_t, M, modeled, clamped = _run_stopped_estimate(oracle, prm, sched, prm.eps, delta, rng, noise_free,
                                                    repetitions)
    value = prm.rescale * p_t
    return EstimateReport(value, "power_sum", prm.alpha, eps, "multiplicative", oracle.ledger.snapshot(),
                          mode=sched.mode,
                          details={"p_succ": out.p_succ, "p_est": p_t, "M": M, "m0": prm.m0, "L": prm.L,
                                   "T_avg": out.T_avg, "T_max": out.T_max, "modeled": modeled,
                                   "clamped": clamped, "params": prm, "schedule": sched, "outcome": out})


@dataclass(frozen=True)
class AnnealingSchedule:
    alpha: float
    n: int
    l: int
    exponents: tuple
    eps_list: tuple
    c_ratio: float = C_RATIO


def annealing_schedule(alpha: float, eps: float, n: int) -> AnnealingSchedule:
    alpha = _check_alpha(alpha, "large")
    if n < 2:
        raise ParameterError("annealing needs n >= 2")
    g = 1.0 + 1.0 / math.log(n)
    l = max(1, int(math.ceil(math.log(alpha) / math.log(g))))
    ex = [alpha * g ** (k - l) for k in range(1, l + 1)]
    ex[-1] = alpha
    eps_list = [0.25] * (l - 1) + [min(0.5, (alpha - 1.0) * eps / 2.0)]
    return AnnealingSchedule(alpha, n, l, tuple(ex), tuple(eps_list))


def _entropy_report(P_est, alpha, eps, oracle, mode, details) -> EstimateReport:
    H = math.log2(P_est) / (1.0 - alpha)
    return EstimateReport(H, "entropy", alpha, eps, "additive", oracle.ledger.snapshot(), mode=mode,
                          details=details)


def estimate_renyi_large_alpha(oracle: PureStateOracle, alpha, eps, delta=1.0 / 3.0, rng=None,
                               noise_free=False, mode: str = EXACT, n: int | None = None,
                               repetitions: int = 1, unknown_support: bool = False,
                               debug: bool = False) -> EstimateReport:
    """Annealed estimate of H_alpha for alpha > 1."""
    eps = _check_eps(eps)
    n_eff = oracle.dist.n if n is None else int(n)
    if n_eff < 2:
        return _entropy_report(1.0, float(alpha), eps, oracle, mode, {"stages": []})
    sch = annealing_schedule(alpha, eps, n_eff)
    g = 1.0 + 1.0 / math.log(n_eff)
    stages, P_k, modes = [], 1.0, set()
    f_prev = None
    for k, (ak, ek) in enumerate(zip(sch.exponents, sch.eps_list), start=1):
        if k > 1:
            P_k = (f_prev / (1.0 - sch.eps_list[k - 2])) ** g
        nu0 = None
        if unknown_support:
            # Both thresholds are valid; the n-free one wins unless alpha_k sits close to 1.
            nu_n = large_alpha_params(ak, ek / 5.0, P_k, 1.0, C_RATIO, n_eff).nu0
            nu0 = max(unknown_support_nu0(ak, ek / 5.0, P_k, 1.0, C_RATIO), nu_n)
        rep = estimate_power_sum_large_alpha(oracle, ak, ek, delta / sch.l, P_k, 1.0, C_RATIO, rng,
                                             noise_free, mode, n_eff, repetitions, nu0)
        modes.add(rep.mode)
        stage = {"k": k, "alpha_k": ak, "eps_k": ek, "P_k": P_k, "estimate": rep.value,
                 "p_succ": rep.details["p_succ"], "modeled": rep.details["modeled"], "m0": rep.details["m0"]}
        if debug:
            exact = exact_power_sum(oracle.dist, ak)
            stage["exact"] = exact
            stage["bracket_ok"] = P_k / C_RATIO <= exact * (1 + 1e-12) and exact <= P_k * (1 + 1e-12)
        stages.append(stage)
        f_prev = rep.value
        last = rep.details["outcome"]
    used = IDEALIZED if IDEALIZED in modes else mode
    return _entropy_report(f_prev, float(alpha), eps, oracle, used,
                           {"stages": stages, "P_est": f_prev, "l": sch.l, "last_outcome": last})


# ---------------------------------------------------------------------------
# alpha < 1


@dataclass(frozen=True)
class SmallAlphaParams:
    alpha: float
    eps: float
    n: int
    c: float
    eps0: float
    delta_prime: float
    m0: int
    deltas: tuple
    L: float
    rescale: float
    poly_eps: float


def small_alpha_params(alpha, eps, n) -> SmallAlphaParams:
    alpha = _check_alpha(alpha, "small")
    eps = _check_eps(eps)
    c = 1.0 - alpha
    eps0 = min(0.5, c * eps / 4.0)
    dp = (eps0 / (40.0 * n)) ** (1.0 / (2.0 * alpha))
    m0 = max(2, int(math.ceil(math.log2(1.0 / dp))) + 1)
    deltas = [2.0 ** (-j) for j in range(1, m0)] + [2.0 ** (-m0 + 1)]
    dm = deltas[-1]
    return SmallAlphaParams(alpha, eps, n, c, eps0, dp, m0, tuple(deltas), dm ** (2 * c) / 8.0,
                            4.0 * dm ** (-2 * c), dm ** (2 * c) * eps0 / 64.0)


@lru_cache(maxsize=256)
def _neg_power_cached(c, delta, eps):
    return approx_neg_power(c, delta, eps, "odd")


def _small_alpha_ideal(c, dj, dm, pe):
    fac = (dm / dj) ** c
    deg = max(1.0, c) / dj * math.log2(1.0 / pe)

    def fn(x):
        ax = np.maximum(np.abs(x), 1e-300)
        base = np.minimum(1.0, 0.5 * dj ** c * ax ** (-c))
        return np.sign(x) * fac * np.where(ax >= dj, base + pe, base)

    return IdealTransform(fn, int(math.ceil(deg)), "odd", f"ideal-negpow({c:g},{dj:g})")


@lru_cache(maxsize=64)
def build_small_alpha_schedule(alpha, eps, n, mode: str = EXACT):
    """S_j = (delta_m0/delta_j)^c P_j with P_j odd negative-power polynomials; beta = 1."""
    prm = small_alpha_params(alpha, eps, n)
    dm = prm.deltas[-1]
    polys, used = None, mode
    if mode == EXACT:
        try:
            polys = []
            for dj in prm.deltas:
                Pj = _neg_power_cached(prm.c, dj, prm.poly_eps)
                fac = (dm / dj) ** prm.c
                polys.append(Pj if fac == 1.0 else certify_bound(scaled(Pj, fac)))
        except DegreeBudgetExceeded:
            used = IDEALIZED
            polys = None
    if polys is None:
        polys = [_small_alpha_ideal(prm.c, dj, dm, prm.poly_eps) for dj in prm.deltas]
    sched = StageSchedule(prm.m0, 1.0, polys, prm.L, prm.eps0, polys[-1], used)
    sched.certify_stage_conditions()
    return prm, sched


def estimate_power_sum_small_alpha(oracle, alpha, eps, delta=1.0 / 3.0, rng=None, noise_free=False,
                                   mode: str = EXACT, n: int | None = None, repetitions: int = 1):
    n_eff = oracle.dist.n if n is None else int(n)
    prm, sched = build_small_alpha_schedule(float(alpha), float(eps), n_eff, mode)
    out, p_t, M, modeled, clamped = _run_stopped_estimate(oracle, prm, sched, prm.eps0, delta, rng, noise_free,
                                                    repetitions)
    return prm, sched, out, prm.rescale * p_t, M, modeled, clamped


def estimate_renyi_small_alpha(oracle: PureStateOracle, alpha, eps, delta=1.0 / 3.0, rng=None,
                               noise_free=False, mode: str = EXACT, n: int | None = None,
                               repetitions: int = 1) -> EstimateReport:
    """Single-stage estimate of H_alpha for alpha in (0, 1)."""
    eps = _check_eps(eps)
    prm, sched, out, P_est, M, modeled, clamped = estimate_power_sum_small_alpha(
        oracle, alpha, eps, delta, rng, noise_free, mode, n, repetitions)
    return _entropy_report(P_est, prm.alpha, eps, oracle, sched.mode,
                           {"P_est": P_est, "p_succ": out.p_succ, "M": M, "m0": prm.m0, "L": prm.L,
                            "modeled": modeled, "clamped": clamped, "params": prm, "outcome": out})


# ---------------------------------------------------------------------------
# sparse support, interpolation, diagnostics


def estimate_renyi_sparse(oracle: PureStateOracle, alpha, eps, delta=1.0 / 3.0, r: int | None = None,
                          rng=None, noise_free=False, mode: str = EXACT, repetitions: int = 1) -> EstimateReport:
    """Known r: the n-dependent constants use r. Unknown r: alpha > 1 with an n-free nu0."""
    alpha = _check_alpha(alpha)
    if r is not None:
        if oracle.dist.support_size > r:
            raise PreconditionError("distribution has more than r positive entries")
        if alpha > 1:
            return estimate_renyi_large_alpha(oracle, alpha, eps, delta, rng, noise_free, mode, n=r,
                                              repetitions=repetitions)
        return estimate_renyi_small_alpha(oracle, alpha, eps, delta, rng, noise_free, mode, n=r,
                                          repetitions=repetitions)
    if alpha < 1:
        raise UnsupportedParameterError("unknown support size is supported only for alpha > 1")
    return estimate_renyi_large_alpha(oracle, alpha, eps, delta, rng, noise_free, mode,
                                      repetitions=repetitions, unknown_support=True)


def interpolation_bounds(power_sum_a2: float, alpha1: float, alpha2: float, n: int) -> tuple[float, float]:
    """Bracket for P_{alpha1} from P_{alpha2}, 0 < alpha1 <= alpha2."""
    if not 0 < alpha1 <= alpha2:
        raise ParameterError("need 0 < alpha1 <= alpha2")
    if not 0 < power_sum_a2 <= n:
        raise ParameterError("power sum must lie in (0, n]")
    r = alpha1 / alpha2
    lo = power_sum_a2 ** r
    return lo, n ** (1.0 - r) * lo


def annealing_ratio_diagnostic(alpha: float, a: float, n: int, witness: bool = False):
    """1/sqrt(gamma_n) with gamma_n = (n^{1-alpha}/a)^{1/alpha}.

    With ``witness`` also returns ratio * sqrt(gamma_n) for the distribution
    p_1 = gamma_n, remaining mass uniform, with g(x) = x^{alpha - 1}.
    """
    if not alpha > 1 or not a > 0 or n < 2:
        raise ParameterError("need alpha > 1, a > 0, n >= 2")
    gam = ((1.0 / a) * n ** (1.0 - alpha)) ** (1.0 / alpha)
    value = 1.0 / math.sqrt(gam)
    if not witness:
        return value
    # The n - 1 equal entries are summed in closed form.
    q = (1.0 - gam) / (n - 1)
    g1, gq = gam ** (alpha - 1.0), q ** (alpha - 1.0)
    ratio = math.sqrt(gam * g1 * g1 + (1.0 - gam) * gq * gq) / (gam * g1 + (1.0 - gam) * gq)
    return value, ratio * math.sqrt(gam)
