"""Command-line front end: exit codes, outputs, determinism."""

import csv
import json
from pathlib import Path

import pytest

from hetgnn.cli import main

FAST_TRAIN = [
    "train", "--dataset", "sbm1k", "--strategy", "layer-based",
    "--hot-ratio", "0.2", "--n", "4", "--fanouts", "5,5,5",
    "--batch-size", "64", "--hidden-dim", "32", "--lr", "0.005",
    "--epochs", "2",
]


def _run(out_dir, args, seed=3):
    return main(["--seed", str(seed), "--out-dir", str(out_dir)] + args)


def test_train_smoke_outputs(tmp_path):
    rc = _run(tmp_path, FAST_TRAIN)
    assert rc == 0
    for name in ("batches.csv", "accuracy.csv", "summary.json",
                 "manifest.json", "trace.txt"):
        assert (tmp_path / name).exists(), name
    with open(tmp_path / "batches.csv") as fh:
        rows = list(csv.DictReader(fh))
    # epochs x batches rows; sbm1k: 650 train vertices / 64 -> 11 batches
    assert len(rows) == 2 * 11
    assert rows[0]["schema_version"] == "1"
    with open(tmp_path / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["seed"] == 3
    assert manifest["dataset_fingerprint"]


def test_invalid_super_batch_exits_2(tmp_path, capsys):
    rc = _run(tmp_path, ["train", "--dataset", "sbm1k", "--n", "0"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "usage:" in err


def test_unknown_dataset_exits_2(tmp_path):
    rc = _run(tmp_path, ["train", "--dataset", "nope-nope"])
    assert rc == 2


def test_equivalence_harness_case1_vs_layer_based_ratio0(tmp_path):
    """Same seed: the loss column is identical between case1 and
    layer-based with hot ratio zero."""
    args_common = ["--fanouts", "5,5,5", "--batch-size", "64",
                   "--hidden-dim", "32", "--lr", "0.005", "--epochs", "2",
                   "--dataset", "sbm1k", "--n", "4"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert _run(a, ["train", "--strategy", "case1",
                    "--hot-ratio", "0"] + args_common) == 0
    assert _run(b, ["train", "--strategy", "layer-based",
                    "--hot-ratio", "0"] + args_common) == 0

    def losses(d):
        with open(d / "batches.csv") as fh:
            return [row["loss"] for row in csv.DictReader(fh)]

    assert losses(a) == losses(b)


def test_rerun_byte_identical_csv(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert _run(a, FAST_TRAIN) == 0
    assert _run(b, FAST_TRAIN) == 0
    assert (a / "batches.csv").read_bytes() == (b / "batches.csv").read_bytes()
    assert (a / "accuracy.csv").read_bytes() == (b / "accuracy.csv").read_bytes()


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "strategy": "case2", "fanouts": [5, 5], "layers": 2,
        "batch_size": 128, "hidden_dim": 16, "epochs": 1, "lr": 0.01,
    }))
    rc = main(["--config", str(cfg), "--seed", "1",
               "--out-dir", str(tmp_path / "out"), "train",
               "--dataset", "sbm1k"])
    assert rc == 0
    with open(tmp_path / "out" / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["config"]["strategy"] == "case2"
    assert manifest["config"]["batch_size"] == 128


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"warp_speed": 9}))
    rc = main(["--config", str(cfg), "--out-dir", str(tmp_path / "o"),
               "train", "--dataset", "sbm1k"])
    assert rc == 2


def test_simulate_emits_traces_and_table(tmp_path):
    rc = _run(tmp_path, [
        "simulate", "--dataset", "powerlaw1k", "--feat-dim", "64",
        "--fanouts", "10,5,5", "--batch-size", "16", "--n", "4",
        "--hidden-dim", "32",
    ], seed=5)
    assert rc == 0
    assert (tmp_path / "simulation.csv").exists()
    assert (tmp_path / "trace_case1.txt").exists()
    line = (tmp_path / "trace_case1.txt").read_text().splitlines()[0]
    parts = line.split()
    assert len(parts) == 6  # t_start t_end role stage batch super_batch
    float(parts[0])
    float(parts[1])


def test_hotness_emits_ranked_csv(tmp_path):
    rc = _run(tmp_path, ["hotness", "--dataset", "powerlaw1k",
                         "--feat-dim", "64", "--fanouts", "5,5",
                         "--batch-size", "64",
                         "--presample-rounds", "3"], seed=5)
    assert rc == 0
    with open(tmp_path / "hotness.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1000
    counts = [int(r["count"]) for r in rows]
    assert counts == sorted(counts, reverse=True)


def test_compare_cache_budget_zero_identical(tmp_path):
    rc = _run(tmp_path, [
        "compare-cache", "--dataset", "powerlaw1k", "--feat-dim", "64",
        "--fanouts", "10,5,5", "--batch-size", "16", "--n", "4",
        "--hidden-dim", "32", "--budgets", "0",
        "--presample-rounds", "5",
    ], seed=5)
    assert rc == 0
    with open(tmp_path / "cache_compare.csv") as fh:
        rows = list(csv.DictReader(fh))
    transfers = {r["policy"]: r["transfer_elements"] for r in rows}
    assert transfers["degree"] == transfers["presample"] == transfers["hybrid"]


def test_report_summarizes_run(tmp_path, capsys):
    assert _run(tmp_path, FAST_TRAIN) == 0
    rc = main(["--out-dir", str(tmp_path), "report"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "epoch 0" in out and "epoch 1" in out


def test_report_missing_run_exits_2(tmp_path):
    rc = main(["--out-dir", str(tmp_path / "void"), "report"])
    assert rc == 2


def test_train_edge_list_dataset(tmp_path):
    edges = tmp_path / "tiny.edges"
    lines = []
    for v in range(30):
        lines.append(f"{v} {(v + 1) % 30}")
        lines.append(f"{v} {(v + 7) % 30}")
    edges.write_text("\n".join(lines) + "\n")
    rc = _run(tmp_path / "out", [
        "train", "--dataset", str(edges), "--feat-dim", "8",
        "--fanouts", "3,3", "--batch-size", "8", "--hidden-dim", "8",
        "--epochs", "1", "--strategy", "case1", "--hot-ratio", "0",
    ])
    assert rc == 0
