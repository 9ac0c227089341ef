"""Experiment harness: grids of pipeline runs, CSV/JSON output and scaling fits."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats

from .core import (
    DiscreteDistribution,
    PureStateOracle,
    exact_entropy,
    exact_power_sum,
    load_distribution,
    make_distribution,
)
from .errors import ParameterError, RenyiError
from .estimators import (
    estimate_power_sum_basic,
    estimate_renyi_large_alpha,
    estimate_renyi_small_alpha,
    estimate_renyi_sparse,
)
from .poly import ChebyshevPoly, certify_bound
from .svt import EXACT, IDEALIZED

PIPELINES = ("large_alpha", "small_alpha", "sparse", "basic")
MODES = (EXACT, IDEALIZED, "noise_free")


@dataclass(frozen=True)
class ExperimentConfig:
    pipeline: str = "large_alpha"
    dist: str = "uniform"
    n_list: tuple = (16,)
    alphas: tuple = (2.0,)
    eps_list: tuple = (0.3,)
    trials: int = 1
    seed: int = 0
    mode: str = EXACT
    delta: float = 1.0 / 3.0
    out: str | None = None
    format: str = "csv"
    r: int | None = None
    repetitions: int = 1
    workers: int = 1
    timing: bool = False  # wall_ms is 0 unless set, so equal seeds give equal bytes

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ParameterError(f"pipeline must be one of {', '.join(PIPELINES)}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {', '.join(MODES)}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError("trials must be a positive integer")
        if self.format not in ("csv", "json"):
            raise ParameterError("format must be csv or json")
        if not 0 < self.delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        if not self.n_list or not self.alphas or not self.eps_list:
            raise ParameterError("grid lists must be nonempty")
        for a in self.alphas:
            if a <= 0 or a == 1:
                raise ParameterError("alpha must be positive and not 1")
            if self.pipeline == "large_alpha" and a <= 1:
                raise ParameterError("large_alpha needs alpha > 1")
            if self.pipeline == "small_alpha" and a >= 1:
                raise ParameterError("small_alpha needs alpha < 1")
            if self.pipeline == "sparse" and a < 1 and self.r is None:
                raise ParameterError("sparse with alpha < 1 needs a known support bound r")
            if self.pipeline == "basic" and a != 2:
                raise ParameterError("basic pipeline estimates the alpha = 2 power sum")
        for e in self.eps_list:
            if not 0 < e < 1:
                raise ParameterError("eps must lie in (0, 1)")

    @property
    def grid(self):
        return [(int(n), float(a), float(e)) for n in self.n_list for a in self.alphas for e in self.eps_list]


@dataclass(frozen=True)
class ResultRow:
    n: int
    alpha: float
    eps: float
    trial: int
    estimate: float
    true_value: float
    abs_err: float
    rel_err: float
    success: bool
    counted_queries: int
    modeled_queries: float
    mode: str
    wall_ms: float
    seed: int


COLUMNS = [f.name for f in fields(ResultRow)]
_CASTS = {"n": int, "trial": int, "counted_queries": int, "seed": int, "mode": str,
          "success": lambda s: s == "True"}


def row_to_dict(row: ResultRow) -> dict:
    return {k: getattr(row, k) for k in COLUMNS}


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in COLUMNS])
    return buf.getvalue()


def parse_csv(text: str) -> list[ResultRow]:
    """Inverse of rows_to_csv; ignores '#' lines (the appended summary)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        out.append(ResultRow(**{k: _CASTS.get(k, float)(rec[k]) for k in COLUMNS}))
    return out


def resolve_distribution(spec: str, n: int, seed: int = 0) -> DiscreteDistribution:
    """A kind[:params] spec, or a path to a one-probability-per-line file."""
    p = Path(spec)
    if p.exists():
        return load_distribution(p)
    if ":" not in spec and (p.suffix or "/" in spec):
        raise ParameterError(f"distribution file {spec} not found")
    return make_distribution(spec, n, seed=seed)


def _trial_seed(seed: int, idx: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, idx, trial]).generate_state(1)[0])


def _identity_poly() -> ChebyshevPoly:
    return certify_bound(ChebyshevPoly(np.array([0.0, 1.0]), "odd", label="x"))


def _run_one(cfg: ExperimentConfig, idx: int, n: int, alpha: float, eps: float, trial: int) -> ResultRow:
    tseed = _trial_seed(cfg.seed, idx, trial)
    rng = np.random.default_rng(tseed)
    noise_free = cfg.mode == "noise_free"
    pmode = IDEALIZED if cfg.mode == IDEALIZED else EXACT
    t0 = time.perf_counter()
    dist = resolve_distribution(cfg.dist, n, seed=cfg.seed)
    oracle = PureStateOracle(dist)
    entropy = cfg.pipeline != "basic"
    truth = exact_entropy(dist, alpha) if entropy else exact_power_sum(dist, alpha)
    try:
        if cfg.pipeline == "large_alpha":
            rep = estimate_renyi_large_alpha(oracle, alpha, eps, cfg.delta, rng, noise_free, pmode,
                                             repetitions=cfg.repetitions)
        elif cfg.pipeline == "small_alpha":
            rep = estimate_renyi_small_alpha(oracle, alpha, eps, cfg.delta, rng, noise_free, pmode,
                                             repetitions=cfg.repetitions)
        elif cfg.pipeline == "sparse":
            rep = estimate_renyi_sparse(oracle, alpha, eps, cfg.delta, cfg.r, rng, noise_free, pmode,
                                        repetitions=cfg.repetitions)
        else:
            rep = estimate_power_sum_basic(oracle, _identity_poly(), 1.0 / dist.n, eps, rng, noise_free,
                                           alpha=alpha)
        est, counted, modeled, mode = rep.value, rep.ledger["counted_queries"], rep.ledger["modeled_queries"], rep.mode
        if noise_free:
            mode = "noise_free"
    except RenyiError as exc:
        est, counted, modeled, mode = math.nan, oracle.ledger.counted_queries, oracle.ledger.modeled_queries, \
            f"failed:{type(exc).__name__}"
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    abs_err = abs(est - truth)
    rel_err = abs_err / abs(truth) if truth != 0 else abs_err
    ok = bool(abs_err <= eps) if entropy else bool(rel_err <= eps)
    return ResultRow(n, alpha, eps, trial, est, truth, abs_err, rel_err, ok and math.isfinite(est),
                     int(counted), float(modeled), mode, wall, tseed)


def _run_task(args):
    return _run_one(*args)


def summarize(rows: list[ResultRow]) -> dict:
    """Per grid point and overall: success rate (Clopper-Pearson 95% CI) and mean queries."""
    def block(rs):
        k = sum(r.success for r in rs)
        ci = stats.binomtest(k, len(rs)).proportion_ci(0.95) if rs else None
        return {"trials": len(rs), "successes": k, "success_rate": k / len(rs),
                "ci95": [ci.low, ci.high],
                "mean_counted_queries": float(np.mean([r.counted_queries for r in rs])),
                "mean_modeled_queries": float(np.mean([r.modeled_queries for r in rs]))}

    groups: dict = {}
    for r in rows:
        groups.setdefault((r.n, r.alpha, r.eps), []).append(r)
    return {"overall": block(rows),
            "points": [{"n": n, "alpha": a, "eps": e, **block(rs)} for (n, a, e), rs in sorted(groups.items())]}


def run_experiment(cfg: ExperimentConfig) -> tuple[list[ResultRow], dict]:
    tasks = [(cfg, i, n, a, e, t) for i, (n, a, e) in enumerate(cfg.grid) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        rows = [_run_task(t) for t in tasks]
    rows.sort(key=lambda r: (r.n, r.alpha, r.eps, r.trial))
    summary = summarize(rows)
    if cfg.out:
        write_results(rows, summary, cfg.out, cfg.format)
    return rows, summary


def write_results(rows, summary, path, fmt="csv") -> None:
    if fmt == "csv":
        text = rows_to_csv(rows) + "# summary " + json.dumps(summary, sort_keys=True) + "\n"
    else:
        text = json.dumps({"rows": [row_to_dict(r) for r in rows], "summary": summary}, indent=1,
                          sort_keys=True) + "\n"
    Path(path).write_text(text)


@dataclass
class ScalingResult:
    pipeline: str
    alpha: float
    eps: float
    n_list: list
    mean_modeled: list
    slope: float
    intercept: float
    residual: float
    target: float
    # Slope of the log-free part (T_max + T_avg / sqrt(p_succ)) of the final stage; diagnostic only.
    core_slope: float = float("nan")
    per_n_core: list = field(default_factory=list)

    @property
    def within(self) -> bool:
        return abs(self.slope - self.target) <= 0.2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["within_tolerance"] = self.within
        return d


def theory_exponent(alpha: float) -> float:
    return 1.0 - 1.0 / (2.0 * alpha) if alpha > 1 else 1.0 / (2.0 * alpha)


def _fit(ns, qs):
    x, y = np.log(np.asarray(ns, float)), np.log(np.asarray(qs, float))
    (slope, icpt), res, *_ = np.polyfit(x, y, 1, full=True)
    return float(slope), float(icpt), float(math.sqrt(res[0] / len(x))) if len(res) else 0.0


def scaling_study(pipeline: str, alpha: float, eps_fixed: float, n_list, trials: int = 1, seed: int = 0,
                  mode: str = IDEALIZED, dist: str = "uniform") -> ScalingResult:
    """Least-squares slope of log(mean modeled queries) against log(n)."""
    ns = sorted(int(n) for n in n_list)
    if len(ns) < 5:
        raise ParameterError("scaling study needs at least 5 sizes")
    ratios = np.diff(np.log(ns))
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ParameterError("n_list must be geometric")
    noise_free = mode == "noise_free"
    pmode = EXACT if mode in (EXACT, "noise_free") else IDEALIZED
    means, cores = [], []
    for idx, n in enumerate(ns):
        d = resolve_distribution(dist, n, seed=seed)
        qs, core = [], math.nan
        for t in range(trials):
            rng = np.random.default_rng(_trial_seed(seed, idx, t))
            oracle = PureStateOracle(d)
            if pipeline == "sparse":
                rep = estimate_renyi_sparse(oracle, alpha, eps_fixed, rng=rng, noise_free=noise_free, mode=pmode)
            elif alpha > 1:
                rep = estimate_renyi_large_alpha(oracle, alpha, eps_fixed, rng=rng, noise_free=noise_free,
                                                 mode=pmode)
            else:
                rep = estimate_renyi_small_alpha(oracle, alpha, eps_fixed, rng=rng, noise_free=noise_free,
                                                 mode=pmode)
            qs.append(rep.ledger["modeled_queries"])
            out = rep.details.get("outcome") or rep.details.get("last_outcome")
            if out is not None:
                core = out.T_max + out.T_avg / math.sqrt(out.p_succ)
        means.append(float(np.mean(qs)))
        cores.append(core)
    slope, icpt, res = _fit(ns, means)
    core_slope = _fit(ns, cores)[0] if all(math.isfinite(c) for c in cores) else math.nan
    return ScalingResult(pipeline, float(alpha), float(eps_fixed), ns, means, slope, icpt, res,
                         theory_exponent(alpha), core_slope, cores)
