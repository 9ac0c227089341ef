"""Command-line entry point.

Exit codes: 0 when every requested suite or threshold passes, 1 when a check
fails, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import suites
from .bench import ExperimentConfig, rows_to_csv, run_experiment, scaling_study
from .errors import ParameterError, RenyiError
from .hardness import lower_bound_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(text):
    return tuple(float(x) for x in str(text).replace(" ", "").split(",") if x)


def _ints(text):
    out = []
    for tok in str(text).replace(" ", "").split(","):
        if not tok:
            continue
        if ".." in tok:  # 2^4..2^10 style: "16..1024" doubles
            lo, hi = (int(v) for v in tok.split(".."))
            while lo <= hi:
                out.append(lo)
                lo *= 2
        else:
            out.append(int(tok))
    return tuple(out)


def read_config(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys use flag names with - or _."""
    cfg = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{i}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


COMMON = {
    "alpha": ("2.0", "comma-separated Renyi orders"),
    "eps": ("0.3", "comma-separated error budgets"),
    "n": ("16", "comma-separated sizes; a..b doubles from a to b"),
    "dist": ("uniform", "kind[:params] (e.g. zipf:s=1) or a file with one probability per line"),
    "trials": ("1", "trials per grid point"),
    "seed": ("0", "master seed"),
    "mode": ("exact_poly", "exact_poly, idealized or noise_free"),
    "delta": (str(1.0 / 3.0), "failure budget"),
    "out": (None, "output path (stdout when absent)"),
    "format": ("csv", "csv or json"),
}


def _add_common(p: argparse.ArgumentParser, keys=COMMON):
    for k, (_, hlp) in keys.items():
        p.add_argument(f"--{k}", default=None, help=hlp)
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def _merged(args, defaults: dict) -> dict:
    vals = {k: d for k, (d, _) in defaults.items()}
    if getattr(args, "config", None):
        vals.update(read_config(args.config))
    for k in list(vars(args)):
        v = getattr(args, k)
        if v is not None and k not in ("config", "cmd", "func"):
            vals[k] = v
    return vals


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


ESTIMATE_EXTRA = {
    "pipeline": ("large_alpha", "large_alpha, small_alpha, sparse or basic"),
    "r": (None, "known support bound for the sparse pipeline"),
    "repetitions": ("1", "median-of-repetitions knob for the amplitude estimate"),
    "workers": ("1", "process pool size"),
    "min_success": (None, "exit 1 when the overall success rate is below this"),
}


def cmd_estimate(args) -> int:
    v = _merged(args, {**COMMON, **ESTIMATE_EXTRA})
    cfg = ExperimentConfig(
        pipeline=v["pipeline"], dist=v["dist"], n_list=_ints(v["n"]), alphas=_floats(v["alpha"]),
        eps_list=_floats(v["eps"]), trials=int(v["trials"]), seed=int(v["seed"]), mode=v["mode"],
        delta=float(v["delta"]), out=v["out"], format=v["format"],
        r=None if v["r"] in (None, "", "none") else int(v["r"]), repetitions=int(v["repetitions"]),
        workers=int(v["workers"]), timing=str(v.get("timing", "false")).lower() in ("1", "true", "yes"))
    rows, summary = run_experiment(cfg)
    if not cfg.out:
        if cfg.format == "csv":
            sys.stdout.write(rows_to_csv(rows) + "# summary " + json.dumps(summary, sort_keys=True) + "\n")
        else:
            sys.stdout.write(json.dumps({"summary": summary, "rows": [r.__dict__ for r in rows]}, indent=1) + "\n")
    else:
        print(json.dumps(summary["overall"], sort_keys=True))
    if v["min_success"] is not None and summary["overall"]["success_rate"] < float(v["min_success"]):
        return EXIT_FAIL
    return EXIT_OK


def cmd_scaling(args) -> int:
    v = _merged(args, {**COMMON, "n": ("16..1024", COMMON["n"][1]), "eps": ("0.25", COMMON["eps"][1]),
                       "mode": ("idealized", COMMON["mode"][1]),
                       "pipeline": ("auto", "large_alpha, small_alpha, sparse; auto picks by alpha")})
    results, ok = [], True
    for a in _floats(v["alpha"]):
        pipe = v["pipeline"] if v["pipeline"] != "auto" else ("large_alpha" if a > 1 else "small_alpha")
        res = scaling_study(pipe, a, _floats(v["eps"])[0], _ints(v["n"]), int(v["trials"]), int(v["seed"]),
                            v["mode"], v["dist"])
        results.append(res.to_dict())
        ok &= res.within
    _emit(json.dumps(results, indent=1) + "\n", v["out"])
    return EXIT_OK if ok else EXIT_FAIL


def _run_suites(ids, out, fmt="text", params=None) -> int:
    params = params or {}
    res = [suites.ALL_SUITES[i](**params.get(i, {})) for i in ids]
    if fmt == "json":
        text = json.dumps([{"criterion": i, "name": r.name, "passed": r.passed, "summary": r.summary,
                            "seconds": r.seconds} for i, r in zip(ids, res)], indent=1) + "\n"
    else:
        text = "".join(f"[{i:2d}] {r.line()}\n" for i, r in zip(ids, res))
    _emit(text, out)
    return EXIT_OK if all(r.passed for r in res) else EXIT_FAIL


def cmd_poly_check(args) -> int:
    v = _merged(args, {"out": COMMON["out"], "format": ("text", "text or json"),
                       "draws": ("20", "random draws per constructor"), "grid": ("100000", "grid points"),
                       "seed": COMMON["seed"]})
    return _run_suites([1], v["out"], v["format"],
                       {1: {"draws": int(v["draws"]), "grid": int(v["grid"]), "seed": int(v["seed"])}})


def cmd_ae_check(args) -> int:
    v = _merged(args, {"out": COMMON["out"], "format": ("text", "text or json"),
                       "trials": ("10000", "Monte-Carlo trials"), "seed": COMMON["seed"]})
    kw = {6: {"trials": int(v["trials"]), "seed": int(v["seed"])},
          7: {"trials": max(1, int(v["trials"]) // 10), "seed": int(v["seed"])}}
    return _run_suites([6, 7], v["out"], v["format"], kw)


def cmd_lower_bound(args) -> int:
    v = _merged(args, {"n": (None, "size"), "alpha": (None, "order in (0, 1)"), "eps": (None, "error in (0, 1/2)"),
                       "out": COMMON["out"], "format": ("text", "text or json")})
    if v["n"] is not None or v["alpha"] is not None or v["eps"] is not None:
        if None in (v["n"], v["alpha"], v["eps"]):
            raise ParameterError("--n, --alpha and --eps must be given together")
        inst = lower_bound_instance(int(v["n"]), float(v["alpha"]), float(v["eps"]))
        _emit(inst.to_json() + "\n", v["out"])
        ok = inst.entropy_gap >= 2 * inst.eps and 0.5 <= inst.hellinger / inst.delta ** 0.5 <= 1.5
        return EXIT_OK if ok else EXIT_FAIL
    return _run_suites([9], v["out"], v["format"])


def cmd_certify_all(args) -> int:
    v = _merged(args, {"out": COMMON["out"], "format": ("text", "text or json"),
                       "only": (None, "comma-separated criterion numbers"),
                       "quick": (None, "reduced trial counts (not the acceptance thresholds' sample sizes)")})
    ids = list(_ints(v["only"])) if v["only"] else sorted(suites.ALL_SUITES)
    kw = {}
    if v["quick"]:
        kw = {1: {"draws": 3}, 5: {"trials": 30}, 6: {"trials": 1000}, 7: {"trials": 100}, 10: {"count": 10}}
    return _run_suites(ids, v["out"], v["format"], kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="renyi-qsvt", description="Renyi-entropy estimation emulator")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("estimate", help="run a pipeline over a grid and emit ResultRows")
    _add_common(p, {**COMMON, **ESTIMATE_EXTRA})
    p.add_argument("--timing", action="store_const", const="true", default=None,
                   help="record wall_ms (breaks byte-identical output)")
    p.set_defaults(func=cmd_estimate)
    p = sub.add_parser("scaling", help="fit the n-exponent of modeled queries")
    _add_common(p, {**COMMON, "pipeline": ("auto", "")})
    p.set_defaults(func=cmd_scaling)
    p = sub.add_parser("poly-check", help="polynomial certification suite")
    for k in ("draws", "grid", "seed", "out", "format"):
        p.add_argument(f"--{k}", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_poly_check)
    p = sub.add_parser("ae-check", help="amplitude-estimation law and rough-estimator checks")
    for k in ("trials", "seed", "out", "format"):
        p.add_argument(f"--{k}", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ae_check)
    p = sub.add_parser("lower-bound", help="hard instance for (n, alpha, eps) or the grid suite")
    for k in ("n", "alpha", "eps", "out", "format"):
        p.add_argument(f"--{k}", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_lower_bound)
    p = sub.add_parser("certify-all", help="run every acceptance suite")
    for k in ("only", "out", "format"):
        p.add_argument(f"--{k}", default=None)
    p.add_argument("--quick", action="store_const", const="true", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_certify_all)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RenyiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
