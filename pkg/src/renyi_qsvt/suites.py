"""Verification suites shared by the CLI and the acceptance tests.

Every suite returns a SuiteResult; ``passed`` applies the suite's threshold to
measured values and never adjusts the threshold.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .amplitude import (
    amplitude_estimate,
    brute_force_qpe,
    qpe_distribution,
    qpe_distribution_symmetric,
    rough_amplitude_estimate,
    ae_error_bound,
)
from .bench import scaling_study
from .core import PureStateOracle, exact_entropy, exact_power_sum, make_distribution
from .errors import RenyiError
from .estimators import (
    C_RATIO,
    annealing_ratio_diagnostic,
    build_large_alpha_schedule,
    estimate_renyi_large_alpha,
    estimate_renyi_small_alpha,
)
from .hardness import hardness_grid
from .poly import (
    ChebyshevPoly,
    approx_bounded_power,
    approx_neg_power,
    approx_rectangle,
    bounded_power_degree_formula,
    certify_bound,
    neg_power_degree_formula,
    rectangle_degree_formula,
)
from .svt import EXACT, IDEALIZED, DiagonalEncoding, StageSchedule, apply_svt, good_mass, run_vst_subroutine


@dataclass
class SuiteResult:
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.summary} ({self.seconds:.1f}s)"


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


FIDELITY_GRID = {"n": (8, 16, 32), "alpha": (1.5, 2.5), "eps": (0.25, 0.4),
                 "dists": ("uniform", "zipf:s=1", "dirac_mixture:w=0.5")}
SMALL_ALPHA_GRID = {"n": (8, 16), "alpha": (0.75,), "eps": (0.3, 0.4),
                    "dists": ("uniform", "zipf:s=1", "dirac_mixture:w=0.5")}


def _loguniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


# 1 -----------------------------------------------------------------------


@_timed
def poly_suite(draws: int = 20, grid: int = 100_000, seed: int = 0, max_ratio: float = 64.0) -> SuiteResult:
    """Random valid parameters for each constructor; certificates at `grid` points."""
    rng = np.random.default_rng(seed)
    records, failures = [], []

    def record(kind, params, build, formula):
        try:
            P = build()
        except RenyiError as exc:
            failures.append((kind, params, repr(exc)))
            return
        ratio = P.degree / formula if formula > 0 else 0.0
        ok = P.cert.passed and P.cert.grid_size >= grid and ratio <= max_ratio
        records.append({"kind": kind, "params": params, "degree": P.degree, "ratio": ratio, "ok": ok,
                        "worst": [(e.description, e.worst, e.bound) for e in P.cert.entries]})
        if not ok:
            failures.append((kind, params, "certificate or degree ratio"))

    for _ in range(draws):
        dp = _loguniform(rng, 0.01, 0.45)
        ep = _loguniform(rng, 1e-10, 0.1)
        t = float(rng.uniform(dp, 1.0))
        record("rectangle", (dp, ep, t), lambda: approx_rectangle(dp, ep, t, grid=grid),
               rectangle_degree_formula(dp, ep))
    for _ in range(draws):
        c = float(rng.uniform(0.05, 3.0))
        d = _loguniform(rng, 0.01, 0.5)
        e = _loguniform(rng, 1e-8, 0.1)
        par = "odd" if rng.random() < 0.5 else "even"
        record("neg_power", (c, d, e, par), lambda: approx_neg_power(c, d, e, par, grid=grid),
               neg_power_degree_formula(c, d, e))
    for _ in range(draws):
        c = float(rng.uniform(0.1, 3.0))
        b = float(rng.uniform(0.2, 1.0))
        nu = b * _loguniform(rng, 0.02, 0.9)
        eta = _loguniform(rng, 1e-8, 0.1)
        record("bounded_power", (c, b, nu, eta), lambda: approx_bounded_power(c, b, nu, eta, grid=grid),
               bounded_power_degree_formula(c, b, nu, eta))
    worst = max((r["ratio"] for r in records), default=math.nan)
    n_ok = sum(r["ok"] for r in records)
    return SuiteResult("polynomial certification", not failures and n_ok == 3 * draws,
                       f"{n_ok}/{3 * draws} draws certified on {grid}-point grids, max degree ratio {worst:.2f}",
                       {"records": records, "failures": failures})


# 2 -----------------------------------------------------------------------


@_timed
def qsvt_suite() -> SuiteResult:
    """S(x) = x on uniform distributions; m = 1 subroutine against apply_svt."""
    S = certify_bound(ChebyshevPoly(np.array([0.0, 1.0]), "odd", label="x"))
    errs = {}
    for n in (4, 8, 16):
        d = make_distribution("uniform", n)
        o = PureStateOracle(d)
        mass = good_mass(apply_svt(DiagonalEncoding.from_oracle(o), S))
        sched = StageSchedule(1, 1.0, [S], 1.0 / n, 0.25, S)
        out = run_vst_subroutine(PureStateOracle(d), sched)
        errs[n] = (abs(mass - 1.0 / n), abs(out.p_succ - mass))
    worst = max(max(v) for v in errs.values())
    return SuiteResult("QSVT semantics", worst <= 1e-12, f"max deviation {worst:.2e} (bound 1e-12)",
                       {"errors": errs})


# 3 -----------------------------------------------------------------------


@_timed
def fidelity_suite(grid: dict = FIDELITY_GRID, mode: str = EXACT) -> SuiteResult:
    """Branch bookkeeping against the closed form sum p_i S(sqrt p_i)^2 for the target S."""
    rows, ok = [], True
    for n in grid["n"]:
        for a in grid["alpha"]:
            for e in grid["eps"]:
                for kind in grid["dists"]:
                    d = make_distribution(kind, n)
                    P = exact_power_sum(d, a)
                    _, sched = build_large_alpha_schedule(a, e / 5.0, P, 1.0, C_RATIO, n, mode)
                    out = run_vst_subroutine(PureStateOracle(d), sched, charge=False)
                    sig = np.sqrt(d.probs)
                    Sv = sched.target_poly(sig)
                    closed = math.fsum(d.probs * Sv * Sv)
                    dev = abs(out.p_succ - closed)
                    lim = 10.0 * sched.L * sched.eps
                    stop = abs(math.fsum(out.p_stop) - 1.0)
                    good = dev <= lim and stop <= 1e-9 and sched.mode == mode
                    ok &= good
                    rows.append({"n": n, "alpha": a, "eps": e, "dist": kind, "dev": dev, "limit": lim,
                                 "ratio": dev / lim, "stop_sum_err": stop, "mode": sched.mode, "ok": good})
    worst = max(r["ratio"] for r in rows)
    return SuiteResult("stage-polynomial fidelity", ok,
                       f"{sum(r['ok'] for r in rows)}/{len(rows)} points, worst |dp|/(10 L eps) = {worst:.3f}",
                       {"rows": rows})


# 4 -----------------------------------------------------------------------


@_timed
def noise_free_suite(large: dict = FIDELITY_GRID, small: dict = SMALL_ALPHA_GRID) -> SuiteResult:
    rows = []
    for g, fn in ((large, estimate_renyi_large_alpha), (small, estimate_renyi_small_alpha)):
        for n in g["n"]:
            for a in g["alpha"]:
                for e in g["eps"]:
                    for kind in g["dists"]:
                        d = make_distribution(kind, n)
                        rep = fn(PureStateOracle(d), a, e, noise_free=True)
                        err = abs(rep.value - exact_entropy(d, a))
                        rows.append({"n": n, "alpha": a, "eps": e, "dist": kind, "err": err,
                                     "mode": rep.mode, "ok": err <= e})
    worst = max(r["err"] / r["eps"] for r in rows)
    n_ok = sum(r["ok"] for r in rows)
    return SuiteResult("noise-free end-to-end", n_ok == len(rows),
                       f"{n_ok}/{len(rows)} within eps, worst err/eps = {worst:.2e}", {"rows": rows})


# 5 -----------------------------------------------------------------------


@_timed
def monte_carlo_suite(trials: int = 300, seed: int = 0, threshold: float = 0.60) -> SuiteResult:
    cases = [(16, 1.5, 0.3, "uniform", estimate_renyi_large_alpha),
             (16, 0.75, 0.4, "zipf:s=1", estimate_renyi_small_alpha)]
    rates, ok = {}, True
    for i, (n, a, e, kind, fn) in enumerate(cases):
        d = make_distribution(kind, n)
        H = exact_entropy(d, a)
        rng = np.random.default_rng([seed, i])
        hits = sum(abs(fn(PureStateOracle(d), a, e, rng=rng).value - H) <= e for _ in range(trials))
        rates[f"n={n} alpha={a} eps={e} {kind}"] = hits / trials
        ok &= hits / trials >= threshold
    return SuiteResult("Monte-Carlo success rate", ok,
                       ", ".join(f"{k}: {v:.3f}" for k, v in rates.items()) + f" (need >= {threshold})",
                       {"rates": rates})


# 6 -----------------------------------------------------------------------


def _tv(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


@_timed
def ae_suite(trials: int = 10_000, seed: int = 0, M: int = 64) -> SuiteResult:
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.0, 1.0, 50)
    tv = 0.0
    for Mq in (2, 4, 8):
        for a in amps:
            tv = max(tv, _tv(qpe_distribution(a, Mq), brute_force_qpe(a, Mq, eigenstate=True)),
                     _tv(qpe_distribution_symmetric(a, Mq), brute_force_qpe(a, Mq, eigenstate=False)))
    ps = rng.uniform(0.0, 1.0, trials)
    hits = sum(abs(amplitude_estimate(p, M, rng).estimate - p) <= ae_error_bound(p, M) for p in ps)
    rate = hits / trials
    need = 8.0 / math.pi ** 2 - 0.03
    return SuiteResult("amplitude-estimation law", tv <= 1e-8 and rate >= need,
                       f"max TV {tv:.1e} (bound 1e-8), error-bound rate {rate:.4f} at M={M} (need >= {need:.4f})",
                       {"tv": tv, "rate": rate})


# 7 -----------------------------------------------------------------------


@_timed
def rough_suite(trials: int = 1000, seed: int = 0, need: float = 0.85) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rates = {}
    for p in (0.04, 0.2, 0.8):
        r = [rough_amplitude_estimate(p, p / 4.0, 1.0 / 8.0, rng).estimate / p for _ in range(trials)]
        rates[p] = float(np.mean([(0.5 <= x <= 2.0) for x in r]))
    return SuiteResult("rough estimator", min(rates.values()) >= need,
                       ", ".join(f"p={p}: {v:.3f}" for p, v in rates.items()) + f" in [1/2, 2] (need >= {need})",
                       {"rates": rates})


# 8 -----------------------------------------------------------------------


@_timed
def scaling_suite(alphas=(1.5, 2.5, 0.5, 0.75), eps: float = 0.25, n_list=tuple(2 ** k for k in range(4, 11)),
                  mode: str = IDEALIZED) -> SuiteResult:
    res = {}
    for a in alphas:
        pipe = "large_alpha" if a > 1 else "small_alpha"
        res[a] = scaling_study(pipe, a, eps, n_list, trials=1, seed=0, mode=mode)
    ok = all(r.within for r in res.values())
    summ = ", ".join(f"alpha={a}: slope {r.slope:.3f} vs {r.target:.3f}" for a, r in res.items())
    return SuiteResult("scaling exponents", ok, summ + " (tolerance 0.2)",
                       {a: r.to_dict() for a, r in res.items()})


# 9 -----------------------------------------------------------------------


@_timed
def lower_bound_suite() -> SuiteResult:
    rows, ok = [], True
    for n, a, e, inst in hardness_grid():
        if inst is None:
            continue
        ratio = inst.hellinger / math.sqrt(inst.delta)
        good = inst.entropy_gap >= 2 * e and 0.5 <= ratio <= 1.5
        ok &= good
        rows.append({"n": n, "alpha": a, "eps": e, "gap": inst.entropy_gap, "dH_over_sqrt_delta": ratio,
                     "ok": good})
    return SuiteResult("lower-bound instances", ok and bool(rows),
                       f"{sum(r['ok'] for r in rows)}/{len(rows)} valid grid points satisfy gap >= 2 eps "
                       f"and d_H/sqrt(delta) in [0.5, 1.5]", {"rows": rows})


# 10 ----------------------------------------------------------------------


def annealing_cases(count: int = 100):
    """The fidelity grid first, then Dirichlet draws cycling over the same (n, alpha, eps)."""
    g = FIDELITY_GRID
    pts = [(n, a, e) for n in g["n"] for a in g["alpha"] for e in g["eps"]]
    cases = [(n, a, e, kind, 0) for (n, a, e) in pts for kind in g["dists"]]
    k = 0
    while len(cases) < count:
        n, a, e = pts[k % len(pts)]
        cases.append((n, a, e, "dirichlet:concentration=0.5", k + 1))
        k += 1
    return cases[:count]


@_timed
def annealing_suite(count: int = 100) -> SuiteResult:
    bad, stages = [], 0
    for n, a, e, kind, s in annealing_cases(count):
        d = make_distribution(kind, n, seed=s)
        rep = estimate_renyi_large_alpha(PureStateOracle(d), a, e, noise_free=True, debug=True)
        for st in rep.details["stages"]:
            stages += 1
            if not st["bracket_ok"]:
                bad.append((n, a, e, kind, s, st["k"], st["P_k"], st["exact"]))
    return SuiteResult("annealing bracket", not bad,
                       f"{stages - len(bad)}/{stages} stages inside [P_k/(4e^2), P_k] over {count} runs",
                       {"violations": bad, "stages": stages})


# 11 ----------------------------------------------------------------------


@_timed
def diagnostic_suite(n: int = 10 ** 6, alpha: float = 2.0, a: float = 1.0) -> SuiteResult:
    value, scaled = annealing_ratio_diagnostic(alpha, a, n, witness=True)
    # Closed-form large-n limit of the witness value is 1/(a + 1).
    return SuiteResult("annealing ratio diagnostic", 0.28 <= scaled <= 0.38,
                       f"ratio * sqrt(gamma_n) = {scaled:.4f} at n={n}, a={a} (need [0.28, 0.38]; "
                       f"large-n limit 1/(a+1) = {1.0 / (a + 1.0):.4f})",
                       {"value": value, "scaled": scaled, "limit": 1.0 / (a + 1.0)})


ALL_SUITES = {
    1: poly_suite, 2: qsvt_suite, 3: fidelity_suite, 4: noise_free_suite, 5: monte_carlo_suite,
    6: ae_suite, 7: rough_suite, 8: scaling_suite, 9: lower_bound_suite, 10: annealing_suite,
    11: diagnostic_suite,
}
