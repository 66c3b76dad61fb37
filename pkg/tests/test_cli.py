"""CLI verbs: generate / solve / bench / stats / inspect-degeneracy."""

import json
import subprocess
import sys

import pytest

from graphopt.cli import main
from graphopt.suite import generate, solve_oracle

FAST = ["--pop", "8", "--iters", "10"]


def test_generate_writes_contract_json_to_stdout(capsys):
    assert main(["generate", "--problem", "P2"]) == 0
    out = capsys.readouterr().out
    assert out.encode("utf-8") == generate("P2", "small", 0).spec_bytes()
    assert list(json.loads(out))[:3] == ["facilities", "countries",
                                         "trial_counts"]


def test_generate_into_directory(tmp_path, capsys):
    assert main(["generate", "--problem", "P1", "--seed", "4",
                 "--out", str(tmp_path)]) == 0
    path = tmp_path / "P1_spec.json"
    assert path.read_bytes() == generate("P1", "small", 4).spec_bytes()
    assert "wrote" in capsys.readouterr().out


def test_generate_explicit_json_path(tmp_path, capsys):
    target = tmp_path / "inst.json"
    assert main(["generate", "--problem", "P4", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["threshold"] == 23


def test_generate_with_disruption(capsys):
    assert main(["generate", "--problem", "P3",
                 "--disrupt", "capacity_halving:0.5:2.0:1"]) == 0
    spec = json.loads(capsys.readouterr().out)
    record = spec["disruption"]
    assert record["mode"] == "capacity_halving"
    assert record["fraction"] == 0.5
    assert record["ports_halved"]


def test_disrupt_without_fraction_exits():
    with pytest.raises(SystemExit, match="MODE:FRACTION"):
        main(["generate", "--problem", "P3", "--disrupt", "capacity_halving"])


def test_unknown_problem_rejected():
    with pytest.raises(ValueError):
        main(["generate", "--problem", "P9"])


def test_unknown_command_exits_with_usage():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_solve_payload_deterministic(capsys):
    argv = ["solve", "--problem", "P2", "--variant", "rao1",
            "--run-seed", "3"] + FAST
    assert main(argv) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(argv) == 0
    second = json.loads(capsys.readouterr().out)
    first.pop("wall_seconds")
    second.pop("wall_seconds")
    assert first == second
    assert first["variant"] == "rao1"
    assert first["run_seed"] == 3
    assert len(first["best_x"]) == 5
    assert first["evaluations"] == 8 * (1 + 10)


def test_solve_with_oracle_field(capsys):
    assert main(["solve", "--problem", "P2", "--variant", "bmwr",
                 "--oracle"] + FAST) == 0
    payload = json.loads(capsys.readouterr().out)
    oracle = solve_oracle(generate("P2", "small", 0))
    assert payload["oracle_kind"] == "brute_force"
    assert payload["oracle_optimum"] == oracle.optimum
    assert payload["best_fitness"] >= oracle.optimum


def test_bench_summary_to_stdout(capsys):
    assert main(["bench", "--problems", "P2", "--variants", "rao1,jaya",
                 "--seeds", "2", "--master-seed", "4",
                 "--pop", "8", "--iters", "10"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# Benchmark summary")
    assert "Winner by mean:" in out


def test_bench_reports_then_stats_round_trip(tmp_path, capsys):
    assert main(["bench", "--problems", "P2", "--variants", "rao1,jaya",
                 "--seeds", "3", "--master-seed", "1", "--pop", "8",
                 "--iters", "10", "--out", str(tmp_path)]) == 0
    wrote = capsys.readouterr().out
    for name in ("P2_spec.json", "results.csv", "summary.md",
                 "degeneracy.md"):
        assert name in wrote
        assert (tmp_path / name).is_file()
    assert main(["stats", "--results", str(tmp_path / "results.csv")]) == 0
    out = capsys.readouterr().out
    assert "P2: winner" in out
    assert "holm=" in out


def test_bench_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"problems": ["P2"], "variants": ["rao1"],
                               "n_seeds": 1, "pop_size": 6,
                               "iterations": 5, "master_seed": 0}))
    out_dir = tmp_path / "reports"
    assert main(["bench", "--config", str(cfg), "--iters", "7",
                 "--out", str(out_dir)]) == 0
    capsys.readouterr()
    rows = (out_dir / "results.csv").read_text().strip().splitlines()
    assert len(rows) == 2  # header + one cell
    evals = int(rows[1].split(",")[4])
    assert evals == 6 * (1 + 7)  # --iters beat the config file


def test_bench_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"max_iters": 9}))
    with pytest.raises(ValueError, match="max_iters"):
        main(["bench", "--config", str(cfg)])


def test_stats_empty_csv_fails(tmp_path, capsys):
    path = tmp_path / "results.csv"
    path.write_text("problem,solver,seed,fitness,evals,memo_hits,"
                    "wall_ms,error\n")
    assert main(["stats", "--results", str(path)]) == 1
    assert "no usable rows" in capsys.readouterr().err


def test_inspect_degeneracy_exit_codes(capsys):
    healthy = main(["inspect-degeneracy", "--problem", "P4",
                    "--samples", "50"])
    flagged = main(["inspect-degeneracy", "--problem", "P4",
                    "--samples", "50", "--drop-property", "who_region"])
    out = capsys.readouterr().out
    assert (healthy, flagged) == (0, 2)
    assert "FLAGGED zero-variance" in out


def test_module_entrypoint_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "graphopt.cli", "generate",
         "--problem", "P7"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    spec = json.loads(proc.stdout)
    assert spec["n_centroids"] * spec["n_exits"] == len(spec["travel_time"])
