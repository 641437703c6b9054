"""Run manifests and the CSV/JSON/trace emitters.

Schemas are versioned: the first column of every CSV is the schema version,
bumped whenever columns change. Per-batch CSVs contain no wall-clock values,
so reruns with equal manifests are byte-identical; measured timings live in
the JSON summary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

BATCH_SCHEMA_VERSION = 1
ACCURACY_SCHEMA_VERSION = 1
HOTNESS_SCHEMA_VERSION = 1
CACHE_SCHEMA_VERSION = 1

_BATCH_COLUMNS = [
    "schema_version", "epoch", "batch", "super_batch", "loss", "reuse_hits",
    "fallbacks", "raw_rows", "cache_hit_rows", "raw_elems", "emb_elems",
    "aux_elems", "grad_elems", "max_weight_delta",
]


@dataclass
class RunManifest:
    config: dict
    seed: int
    code_version: str = __version__
    dataset_fingerprint: str = ""
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "code_version": self.code_version,
            "dataset_fingerprint": self.dataset_fingerprint,
            "outputs": list(self.outputs),
        }

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_batch_csv(path: str | Path, reports) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(_BATCH_COLUMNS)
        for report in reports:
            for row in report.batch_rows:
                writer.writerow([_fmt(BATCH_SCHEMA_VERSION)] + [
                    _fmt(row[c]) for c in _BATCH_COLUMNS[1:]
                ])


def write_accuracy_csv(path: str | Path, reports) -> None:
    """Epoch-to-accuracy series for convergence plots."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", "epoch", "val_accuracy",
                         "test_accuracy", "mean_loss"])
        for r in reports:
            mean_loss = sum(r.losses) / len(r.losses) if r.losses else 0.0
            writer.writerow([ACCURACY_SCHEMA_VERSION, r.epoch,
                             _fmt(r.val_accuracy), _fmt(r.test_accuracy),
                             _fmt(mean_loss)])


def write_trace(path: str | Path, events) -> None:
    """Line-oriented schedule trace: t_start t_end role stage batch super_batch."""
    with open(path, "w", encoding="ascii") as fh:
        for ev in events:
            fh.write(ev.line() + "\n")


def write_hotness_csv(path: str | Path, table) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", "rank", "vertex", "count"])
        for i, v in enumerate(table.rank):
            writer.writerow([HOTNESS_SCHEMA_VERSION, i, int(v),
                             int(table.counts[v])])


def write_cache_csv(path: str | Path, outcomes) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", "policy", "budget_bytes",
                         "transfer_elements", "memory_bytes", "hit_rows",
                         "needed_rows", "hit_rate"])
        for o in outcomes:
            writer.writerow([CACHE_SCHEMA_VERSION, o.policy,
                             _fmt(o.budget_bytes), o.transfer_elements,
                             _fmt(o.memory_bytes), o.hit_rows, o.needed_rows,
                             _fmt(o.hit_rate)])


def summarize_reports(reports) -> dict:
    out = []
    for r in reports:
        out.append({
            "epoch": r.epoch,
            "mean_loss": sum(r.losses) / len(r.losses) if r.losses else 0.0,
            "val_accuracy": r.val_accuracy,
            "test_accuracy": r.test_accuracy,
            "transfer_elements": dict(r.transfers.elements),
            "transfer_bytes": r.transfers.bytes_by_kind(),
            "reuse_hits": r.transfers.reuse_hits,
            "fallbacks": r.transfers.fallbacks,
            "cache_hit_rows": r.transfers.cache_hit_rows,
            "warmup_computed": r.warmup_computed,
            "max_gap": r.max_gap,
            "max_gap_batch": r.max_gap_batch,
            "epsilon_trace": r.epsilon_trace,
            "stage_seconds_measured": r.stage_seconds_measured,
            "stage_seconds_simulated": r.stage_seconds_simulated,
            "sim_makespan": r.sim_makespan,
            "sim_utilization": r.sim_utilization,
            "sim_memory_high_water": r.sim_memory_high_water,
        })
    return {"epochs": out}


def write_summary_json(path: str | Path, manifest: RunManifest,
                       reports) -> None:
    payload = {"manifest": manifest.to_dict()}
    payload.update(summarize_reports(reports))
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
