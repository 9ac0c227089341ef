import json
import math

import pytest

from renyi_qsvt.bench import (
    ExperimentConfig,
    ResultRow,
    COLUMNS,
    parse_csv,
    rows_to_csv,
    run_experiment,
    scaling_study,
    theory_exponent,
)
from renyi_qsvt.cli import main, read_config
from renyi_qsvt.errors import ParameterError

ORDER = ["n", "alpha", "eps", "trial", "estimate", "true_value", "abs_err", "rel_err", "success",
         "counted_queries", "modeled_queries", "mode", "wall_ms", "seed"]


def test_column_order():
    assert COLUMNS == ORDER


def test_csv_round_trip():
    rows, _ = run_experiment(ExperimentConfig(pipeline="basic", n_list=(4, 8), eps_list=(0.2,), trials=3))
    back = parse_csv(rows_to_csv(rows))
    assert back == rows


def test_noise_free_rows_succeed():
    rows, summary = run_experiment(ExperimentConfig(pipeline="large_alpha", n_list=(8,), alphas=(2.0,),
                                                    eps_list=(0.3,), mode="noise_free"))
    assert rows[0].success and rows[0].mode == "noise_free"
    assert summary["overall"]["success_rate"] == 1.0


def test_config_validation():
    for kw in [dict(pipeline="nope"), dict(alphas=(1.0,)), dict(pipeline="small_alpha", alphas=(2.0,)),
               dict(trials=0), dict(eps_list=(1.5,)), dict(pipeline="sparse", alphas=(0.5,))]:
        with pytest.raises(ParameterError):
            ExperimentConfig(**kw)


def test_theory_exponent():
    assert theory_exponent(2.0) == pytest.approx(0.75)
    assert theory_exponent(0.5) == pytest.approx(1.0)


def test_scaling_needs_five_points():
    with pytest.raises(ParameterError):
        scaling_study("large_alpha", 2.0, 0.25, (16, 32, 64), 1)


def test_cli_bytes_are_deterministic(tmp_path, capsys):
    args = ["estimate", "--pipeline", "basic", "--n", "4,8", "--eps", "0.2", "--trials", "4", "--seed", "5"]
    outs = []
    for i in range(2):
        f = tmp_path / f"o{i}.csv"
        assert main(args + ["--out", str(f)]) == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().splitlines()[0] == ",".join(ORDER)
    summary = json.loads(outs[0].decode().splitlines()[-1][len("# summary "):])
    assert summary["overall"]["trials"] == 8


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("# basic run\npipeline = basic\nn = 4\neps = 0.2\ntrials = 2\nmode = noise_free\n")
    assert read_config(str(cfg))["pipeline"] == "basic"
    assert main(["estimate", "--config", str(cfg)]) == 0
    rows = parse_csv(capsys.readouterr().out)
    assert len(rows) == 2 and rows[0].n == 4
    assert main(["estimate", "--config", str(cfg), "--n", "8", "--trials", "1"]) == 0
    rows = parse_csv(capsys.readouterr().out)
    assert [r.n for r in rows] == [8]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["estimate", "--pipeline", "bogus"]) == 2
    assert main(["estimate", "--alpha", "1"]) == 2
    assert main(["lower-bound", "--n", "4", "--alpha", "0.5", "--eps", "0.1"]) == 2
    assert main(["lower-bound", "--n", "10", "--alpha", "0.5", "--eps", "0.1"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 10
    assert main(["estimate", "--pipeline", "basic", "--n", "4", "--eps", "0.01", "--trials", "3",
                 "--min_success", "1.01"]) == 1
    bad = tmp_path / "bad.conf"
    bad.write_text("no equals sign\n")
    assert main(["estimate", "--config", str(bad)]) == 2


def test_cli_certify_subset(capsys):
    assert main(["certify-all", "--only", "2,9", "--format", "json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert [r["criterion"] for r in res] == [2, 9] and all(r["passed"] for r in res)


def test_resolve_distribution(tmp_path):
    from renyi_qsvt.bench import resolve_distribution

    assert resolve_distribution("dirichlet:concentration=0.5", 8).n == 8
    f = tmp_path / "d.txt"
    f.write_text("0.5\n0.25\n0.25\n")
    assert resolve_distribution(str(f), 99).n == 3
    with pytest.raises(ParameterError):
        resolve_distribution(str(tmp_path / "missing.txt"), 4)
