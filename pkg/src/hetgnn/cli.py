"""Command-line front end: train, simulate, hotness, compare-cache, report.

Exit codes: 0 success, 2 configuration error, 3 simulated OOM, 4 staleness
contract failure (reserved; the contract should never trip outside test
builds).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cache_policies import compare_policies
from .devsim import SimulatedOOM, simulate
from .graph import GraphFormatError, load_edge_list
from .hotness import estimate_hotness
from .orchestrator import (
    ConfigError,
    TrainConfig,
    run_training,
)
from .presets import paper_like_preset
from .reporting import (
    RunManifest,
    summarize_reports,
    write_accuracy_csv,
    write_batch_csv,
    write_cache_csv,
    write_hotness_csv,
    write_summary_json,
    write_trace,
)
from .runplan import super_batch_groups
from .sampler import Fanouts
from .skeletons import STRATEGIES, build_baseline_skeleton
from .store import StalenessViolation
from .workloads import powerlaw_fixture, profile_epoch, sbm_fixture

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OOM = 3
EXIT_STALENESS = 4

DATASETS = {
    "sbm1k": lambda: sbm_fixture(),
    "powerlaw1k": lambda: powerlaw_fixture(),
}


def _load_dataset(name: str, feat_dim: int, seed: int):
    if name in DATASETS:
        return DATASETS[name]()
    path = Path(name)
    if not path.exists():
        raise ConfigError(
            f"unknown dataset {name!r} (builtins: {sorted(DATASETS)}, "
            f"or pass an edge-list path)"
        )
    return load_edge_list(path, feat_dim, seed, symmetrize=True,
                          add_self_loops=True)


def _config_from_args(args) -> TrainConfig:
    overrides = {}
    if args.config:
        with open(args.config, "r", encoding="ascii") as fh:
            overrides.update(json.load(fh))
    cfg = TrainConfig(preset=paper_like_preset())
    for key, value in overrides.items():
        if key == "fanouts":
            value = tuple(value)
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    for key in ("model", "layers", "batch_size", "hot_ratio", "lr", "epochs",
                "strategy", "optimizer", "presample_rounds", "execution",
                "hidden_dim"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "fanouts", None):
        cfg.fanouts = tuple(int(x) for x in args.fanouts.split(","))
        cfg.layers = len(cfg.fanouts)
    if getattr(args, "n", None) is not None:
        cfg.super_batch_n = args.n
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    graph, data = _load_dataset(args.dataset, args.feat_dim, cfg.seed)
    reports = run_training(graph, data, cfg)
    out = _out_dir(args)
    manifest = RunManifest(
        config=cfg.to_dict(), seed=cfg.seed,
        dataset_fingerprint=graph.fingerprint()[:16] + data.fingerprint()[:16],
        outputs=["batches.csv", "accuracy.csv", "summary.json", "trace.txt"],
    )
    write_batch_csv(out / "batches.csv", reports)
    write_accuracy_csv(out / "accuracy.csv", reports)
    write_summary_json(out / "summary.json", manifest, reports)
    write_trace(out / "trace.txt",
                [ev for r in reports for ev in r.sim_events])
    manifest.write(out / "manifest.json")
    final = reports[-1]
    print(f"epochs={len(reports)} final_loss={final.losses[-1]:.4f} "
          f"val={final.val_accuracy:.4f} test={final.test_accuracy:.4f} "
          f"reuse_hits={sum(r.transfers.reuse_hits for r in reports)} "
          f"fallbacks={sum(r.transfers.fallbacks for r in reports)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    graph, data = _load_dataset(args.dataset, args.feat_dim, cfg.seed)
    profile = profile_epoch(
        graph, data, fanouts=cfg.fanouts, batch_size=cfg.batch_size,
        seed=cfg.seed, super_batch_n=cfg.super_batch_n,
        dims=cfg.dims(data.feat_dim, max(data.num_classes, 2)),
        model=cfg.model,
    )
    out = _out_dir(args)
    rows = []
    strategies = [cfg.strategy] if args.only_strategy else list(STRATEGIES)
    for strategy in strategies:
        if strategy == "layer-based":
            sim_cfg = TrainConfig(**{**cfg.to_dict(), "strategy": strategy,
                                     "preset": cfg.preset})
            sim_cfg.simulate_costs = True
            reports = run_training(graph, data, sim_cfg)
            makespan = reports[-1].sim_makespan
            util = reports[-1].sim_utilization
        else:
            tasks = build_baseline_skeleton(
                profile, strategy,
                cached=_baseline_cache(cfg, graph, data.feat_dim, strategy),
                pipelined=not args.serialized,
            )
            res = simulate(tasks, cfg.preset.devices, cfg.preset.link)
            write_trace(out / f"trace_{strategy}.txt", res.trace.events)
            makespan = res.makespan
            util = res.utilization
        rows.append((strategy, makespan, util))
        print(f"{strategy}: makespan={makespan:.4f}s "
              f"util_fast={util.get('fast', 0):.3f} "
              f"util_slow={util.get('slow', 0):.3f}")
    with open(out / "simulation.csv", "w", encoding="ascii") as fh:
        fh.write("schema_version,strategy,makespan,util_fast,util_slow\n")
        for strategy, makespan, util in rows:
            fh.write(f"1,{strategy},{makespan:.6f},"
                     f"{util.get('fast', 0):.6f},{util.get('slow', 0):.6f}\n")
    return EXIT_OK


def _baseline_cache(cfg, graph, feat_dim, strategy):
    from .cache_policies import degree_cache

    budget = cfg.preset.cache_budget_bytes
    if strategy == "case4":
        budget = max(0.0, budget - (graph.num_vertices + 1 + graph.num_edges) * 8.0)
    if strategy in ("case3", "case4"):
        return degree_cache(graph, budget, feat_dim)
    return set()


def cmd_hotness(args) -> int:
    cfg = _config_from_args(args)
    graph, data = _load_dataset(args.dataset, args.feat_dim, cfg.seed)
    train_ids = np.nonzero(data.train_mask)[0].astype(np.int64)
    table = estimate_hotness(graph, train_ids, Fanouts(tuple(cfg.fanouts)),
                             cfg.presample_rounds, cfg.seed,
                             batch_size=cfg.batch_size)
    out = _out_dir(args)
    write_hotness_csv(out / "hotness.csv", table)
    top = table.rank[:10]
    print("top10:", " ".join(f"{int(v)}:{int(table.counts[v])}" for v in top))
    return EXIT_OK


def cmd_compare_cache(args) -> int:
    cfg = _config_from_args(args)
    graph, data = _load_dataset(args.dataset, args.feat_dim, cfg.seed)
    train_ids = np.nonzero(data.train_mask)[0].astype(np.int64)
    table = estimate_hotness(graph, train_ids, Fanouts(tuple(cfg.fanouts)),
                             cfg.presample_rounds, cfg.seed,
                             batch_size=cfg.batch_size)
    profile = profile_epoch(
        graph, data, fanouts=cfg.fanouts, batch_size=cfg.batch_size,
        seed=cfg.seed, super_batch_n=cfg.super_batch_n,
    )
    groups_idx = super_batch_groups(len(profile.stacks), cfg.super_batch_n)
    groups = [[profile.stacks[b] for b in g] for g in groups_idx]
    if args.budgets:
        budgets = [float(x) for x in args.budgets.split(",")]
    else:
        full = graph.num_vertices * data.feat_dim * 8.0
        budgets = [0.0, 0.05 * full, 0.1 * full, 0.2 * full, 0.4 * full]
    outcomes = compare_policies(graph, table, groups, budgets,
                                data.feat_dim, cfg.hidden_dim,
                                hot_ratio=cfg.hot_ratio)
    out = _out_dir(args)
    write_cache_csv(out / "cache_compare.csv", outcomes)
    for o in outcomes:
        print(f"{o.policy:10s} budget={o.budget_bytes:12.0f} "
              f"transfer={o.transfer_elements:12d} hit_rate={o.hit_rate:.3f}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out_dir)
    summary_path = out / "summary.json"
    if not summary_path.exists():
        raise ConfigError(f"no summary.json under {out}")
    with open(summary_path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    print(f"run seed={payload['manifest']['seed']} "
          f"strategy={payload['manifest']['config'].get('strategy')}")
    for epoch in payload["epochs"]:
        print(f"  epoch {epoch['epoch']}: loss={epoch['mean_loss']:.4f} "
              f"val={epoch['val_accuracy']:.4f} test={epoch['test_accuracy']:.4f} "
              f"reuse={epoch['reuse_hits']} fallbacks={epoch['fallbacks']} "
              f"sim_makespan={epoch['sim_makespan']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetgnn",
        description="two-device sample-based GNN training engine",
    )
    parser.add_argument("--config", help="JSON config file mirroring TrainConfig")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", default="runs/latest")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--dataset", default="sbm1k")
        p.add_argument("--feat-dim", type=int, default=32)
        p.add_argument("--model", choices=("gcn", "sage"), default=None)
        p.add_argument("--fanouts", default=None,
                       help="comma-separated, outermost first, e.g. 25,10,5")
        p.add_argument("--batch-size", type=int, default=None)
        p.add_argument("--hot-ratio", type=float, default=None, dest="hot_ratio")
        p.add_argument("--presample-rounds", type=int, default=None,
                       dest="presample_rounds")
        p.add_argument("--n", type=int, default=None,
                       help="batches per super-batch")
        p.add_argument("--hidden-dim", type=int, default=None, dest="hidden_dim")

    p_train = sub.add_parser("train", help="run the training loop")
    add_common(p_train)
    p_train.add_argument("--strategy", choices=STRATEGIES, default=None)
    p_train.add_argument("--lr", type=float, default=None)
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--optimizer", choices=("sgd", "adam"), default=None)
    p_train.add_argument("--execution", choices=("serial", "pipelined"),
                         default=None)
    p_train.set_defaults(func=cmd_train)

    p_sim = sub.add_parser("simulate", help="cost-simulate the strategies")
    add_common(p_sim)
    p_sim.add_argument("--strategy", choices=STRATEGIES, default=None)
    p_sim.add_argument("--only-strategy", action="store_true")
    p_sim.add_argument("--serialized", action="store_true",
                       help="disable pipeline overlap in baseline skeletons")
    p_sim.set_defaults(func=cmd_simulate)

    p_hot = sub.add_parser("hotness", help="emit the ranked hotness table")
    add_common(p_hot)
    p_hot.set_defaults(func=cmd_hotness)

    p_cache = sub.add_parser("compare-cache",
                             help="sweep cache policies over memory budgets")
    add_common(p_cache)
    p_cache.add_argument("--budgets", default=None,
                         help="comma-separated byte budgets")
    p_cache.set_defaults(func=cmd_compare_cache)

    p_report = sub.add_parser("report", help="summarize a finished run")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    except SimulatedOOM as exc:
        print(f"simulated OOM: {exc}", file=sys.stderr)
        return EXIT_OOM
    except StalenessViolation as exc:
        print(f"staleness contract failure: {exc}", file=sys.stderr)
        return EXIT_STALENESS


if __name__ == "__main__":
    raise SystemExit(main())
