"""End-to-end training driver for the five orchestration strategies.

The four step-based baselines and the layer-split strategy share one
numerical path; they differ in placement labels, transfer accounting and
simulated cost. The layer-split strategy adds hot-vertex embedding staging
with the super-batch protocol: embeddings computed during super-batch k (in
hotness order, chunk j pinned to published parameter version k*n+j) are
consumable only during super-batch k+1, which bounds every reuse gap by
2n-1. Staging work can run serially inline or on a real worker thread; both
executions produce bit-identical numbers.
"""

from __future__ import annotations

import queue as queue_mod
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import runplan
from .devsim import ROLE_FAST, ROLE_SLOW, SimResult, simulate
from .gnnmath import (
    AdamState,
    ModelParams,
    adam_step,
    backward_batch,
    forward_batch,
    init_params,
    layer_forward,
    loss_and_grad,
    sgd_step,
)
from .graph import Graph, VertexData
from .hotness import (
    FeedbackSnapshot,
    HotSetPartition,
    estimate_hotness,
    partition_hot,
    select_hot,
)
from .presets import DevicePreset, paper_like_preset
from .sampler import Block, Fanouts, sample_khop, sample_khop_skip_hot, sample_one_hop_hot
from .skeletons import (
    build_baseline_skeleton,
    build_layer_based_skeleton,
    shape_from_stack,
    STRATEGIES,
    WorkloadProfile,
)
from .store import EmbeddingStore
from .transfer import (
    KIND_AUX,
    KIND_EMB,
    KIND_GRAD,
    REAL_SIZE,
    TransferRecord,
    batch_gather_accounting,
    staging_elements,
)

EXECUTIONS = ("serial", "pipelined")


class ConfigError(ValueError):
    pass


class FallbackBudgetExceeded(RuntimeError):
    """More reuse events fell back to raw compute than the configured cap."""


@dataclass
class TrainConfig:
    """Training configuration; defaults follow the evaluated setup
    (batch 1024, 3 layers, fanouts [25, 10, 5], hot ratio 0.2)."""

    model: str = "gcn"
    layers: int = 3
    fanouts: tuple = (25, 10, 5)
    hidden_dim: int = 64
    batch_size: int = 1024
    super_batch_n: int = 4
    hot_ratio: float = 0.2
    strategy: str = "layer-based"
    lr: float = 0.1
    epochs: int = 1
    seed: int = 0
    optimizer: str = "sgd"
    presample_rounds: int = 20
    execution: str = "serial"
    stage_budget_frac: float = 1.0
    max_fallback_frac: float = 0.5
    simulate_costs: bool = True
    preset: DevicePreset = field(default_factory=paper_like_preset)

    def validate(self) -> None:
        if self.model not in ("gcn", "sage"):
            raise ConfigError(f"model must be gcn or sage, got {self.model!r}")
        if self.layers != len(self.fanouts):
            raise ConfigError(
                f"layers ({self.layers}) must equal len(fanouts) "
                f"({len(self.fanouts)})"
            )
        Fanouts(tuple(self.fanouts))  # raises on invalid counts
        if self.super_batch_n < 1:
            raise ConfigError(
                f"super-batch size must be >= 1, got {self.super_batch_n}"
            )
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if not (0.0 <= self.hot_ratio <= 1.0):
            raise ConfigError(f"hot ratio must be in [0, 1], got {self.hot_ratio}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )
        if self.execution not in EXECUTIONS:
            raise ConfigError(
                f"execution must be one of {EXECUTIONS}, got {self.execution!r}"
            )
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be sgd or adam, got {self.optimizer!r}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not (0.0 < self.stage_budget_frac <= 1.0):
            raise ConfigError("stage budget fraction must be in (0, 1]")

    def dims(self, feat_dim: int, num_classes: int) -> list[int]:
        return [feat_dim] + [self.hidden_dim] * (self.layers - 1) + [num_classes]

    def to_dict(self) -> dict:
        return {
            "model": self.model, "layers": self.layers,
            "fanouts": list(self.fanouts), "hidden_dim": self.hidden_dim,
            "batch_size": self.batch_size, "super_batch_n": self.super_batch_n,
            "hot_ratio": self.hot_ratio, "strategy": self.strategy,
            "lr": self.lr, "epochs": self.epochs, "seed": self.seed,
            "optimizer": self.optimizer,
            "presample_rounds": self.presample_rounds,
            "execution": self.execution,
            "stage_budget_frac": self.stage_budget_frac,
            "max_fallback_frac": self.max_fallback_frac,
            "preset": self.preset.name,
        }


@dataclass
class EpochReport:
    epoch: int
    losses: list = field(default_factory=list)
    batch_rows: list = field(default_factory=list)
    val_accuracy: float = 0.0
    test_accuracy: float = 0.0
    transfers: TransferRecord = field(default_factory=TransferRecord)
    epsilon_trace: list = field(default_factory=list)
    max_weight_deltas: list = field(default_factory=list)
    max_gap: int = 0
    max_gap_batch: int = -1
    max_gap_super_batch: int = -1
    stage_seconds_measured: dict = field(default_factory=dict)
    stage_seconds_simulated: dict = field(default_factory=dict)
    sim_makespan: float = 0.0
    sim_utilization: dict = field(default_factory=dict)
    sim_memory_high_water: dict = field(default_factory=dict)
    sim_events: list = field(default_factory=list)
    stage_events: list = field(default_factory=list)  # (target_sb, version, count)
    warmup_computed: int = 0


@dataclass
class EpochPlan:
    epoch: int
    batches: list
    groups: list
    batch_seeds: list
    first_global_batch: int
    queues: dict = field(default_factory=dict)
    hot_seeds: dict = field(default_factory=dict)


@dataclass
class _RunState:
    params: ModelParams
    store: EmbeddingStore | None
    hot_list: np.ndarray
    adam: AdamState = field(default_factory=AdamState)
    global_batch: int = 0
    idle_ema: float = 0.0
    partitions: dict = field(default_factory=dict)
    cached_now: set = field(default_factory=set)
    sim_events: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# plan construction
# ---------------------------------------------------------------------------

def build_epoch_plan(graph: Graph, data: VertexData, config: TrainConfig,
                     hot_list: np.ndarray, epoch: int,
                     first_global_batch: int) -> EpochPlan:
    train_ids = np.nonzero(data.train_mask)[0].astype(np.int64)
    order = runplan.shuffle_epoch(train_ids, config.seed, epoch)
    batches = runplan.split_batches(order, config.batch_size)
    groups = runplan.super_batch_groups(len(batches), config.super_batch_n)
    seeds = [runplan.batch_sample_seed(config.seed, epoch, b)
             for b in range(len(batches))]
    plan = EpochPlan(epoch=epoch, batches=batches, groups=groups,
                     batch_seeds=seeds, first_global_batch=first_global_batch)
    if config.strategy == "layer-based" and hot_list.size and config.layers > 1:
        fanouts = Fanouts(tuple(config.fanouts))
        hot_set = set(int(v) for v in hot_list)
        for g in range(1, len(groups)):
            reachable: set = set()
            for b in groups[g]:
                stack = sample_khop(
                    graph, batches[b], fanouts,
                    runplan.queue_replay_seed(config.seed, epoch, g),
                )
                reachable.update(int(v) for v in stack.blocks[0].dst_vertices)
            queue = np.array([v for v in hot_list if int(v) in reachable],
                             dtype=np.int64)
            if config.stage_budget_frac < 1.0 and queue.size:
                keep = int(np.ceil(queue.size * config.stage_budget_frac))
                queue = queue[:keep]
            plan.queues[g] = queue
            plan.hot_seeds[g] = runplan.hot_sample_seed(config.seed, epoch, g)
    return plan


# ---------------------------------------------------------------------------
# numeric batch step (shared by every strategy and both executors)
# ---------------------------------------------------------------------------

def _train_batch(graph: Graph, data: VertexData, config: TrainConfig,
                 state: _RunState, stack, batch_ids: np.ndarray,
                 inject_idx: np.ndarray, inject_values: np.ndarray):
    inputs = data.features[stack.bottom_src()]
    inject = None
    if inject_idx.size:
        inject = (inject_idx, inject_values)
    logits, caches = forward_batch(stack, inputs, state.params, inject=inject)
    loss, dlogits = loss_and_grad(logits, data.labels[batch_ids])
    grads = backward_batch(caches, dlogits, state.params)
    max_delta = 0.0
    old = [[w.copy() for w in layer] for layer in state.params.weights]
    if config.optimizer == "sgd":
        sgd_step(state.params, grads, config.lr)
    else:
        adam_step(state.params, grads, config.lr, state.adam)
    for layer_old, layer_new in zip(old, state.params.weights):
        for wo, wn in zip(layer_old, layer_new):
            d = float(np.max(np.abs(wn - wo))) if wo.size else 0.0
            max_delta = max(max_delta, d)
    return loss, max_delta


def _compute_chunk_embeddings(graph: Graph, data: VertexData,
                              config: TrainConfig, chunk_verts: np.ndarray,
                              bottom_weights: list, hot_seed: int):
    """Bottom-layer embeddings for a hot chunk from its own one-hop sample.

    Per-vertex RNG streams make chunk-by-chunk sampling identical to sampling
    the whole queue at once.
    """
    block = sample_one_hop_hot(graph, chunk_verts, config.fanouts[0],
                               hot_seed, layer=0)
    h, _ = layer_forward(config.model, block, data.features[block.src_vertices],
                         bottom_weights, activation=config.layers > 1)
    return block, h


class _ParamCell:
    """Versioned bottom-layer weight snapshots with blocking reads."""

    def __init__(self):
        self._cond = threading.Condition()
        self._snaps: dict[int, list] = {}

    def publish(self, version: int, weights: list) -> None:
        with self._cond:
            self._snaps[version] = [w.copy() for w in weights]
            self._cond.notify_all()

    def wait_for(self, version: int) -> list:
        with self._cond:
            while version not in self._snaps:
                self._cond.wait()
            return self._snaps[version]

    def prune(self, keep_from: int) -> None:
        with self._cond:
            self._snaps = {v: w for v, w in self._snaps.items() if v >= keep_from}


# ---------------------------------------------------------------------------
# epoch execution
# ---------------------------------------------------------------------------

def _partition_for_group(config: TrainConfig, state: _RunState, queue,
                         profile_hint: dict) -> HotSetPartition:
    """Between super-batches the coordinator rebalances the next queue using
    the EMA idle estimate and the remaining fast-device memory."""
    if queue is None or not queue.size:
        return HotSetPartition(cpu_compute=np.empty(0, np.int64),
                               gpu_cache=np.empty(0, np.int64),
                               hot_ratio=config.hot_ratio)
    preset = config.preset
    feat_dim = profile_hint["feat_dim"]
    emb_dim = profile_hint["emb_dim"]
    used = (profile_hint["topology_bytes"]
            + profile_hint["max_activation_bytes"]
            + queue.size * emb_dim * REAL_SIZE
            + len(state.cached_now) * feat_dim * REAL_SIZE)
    free = max(0.0, min(preset.cache_budget_bytes,
                        preset.fast.memory_capacity - used))
    slow_time_per_vertex = profile_hint["embed_flops_per_vertex"] / preset.slow.compute_rate
    part = partition_hot(
        queue,
        FeedbackSnapshot(observed_fast_idle_time=state.idle_ema,
                         free_fast_memory=free),
        feat_dim, emb_dim,
        est_slow_time_per_vertex=slow_time_per_vertex,
    )
    part.hot_ratio = config.hot_ratio
    return part


def _run_epoch(graph: Graph, data: VertexData, config: TrainConfig,
               state: _RunState, plan: EpochPlan,
               pipelined: bool) -> EpochReport:
    report = EpochReport(epoch=plan.epoch)
    fanouts = Fanouts(tuple(config.fanouts))
    feat_dim = data.feat_dim
    emb_dim = config.hidden_dim if config.layers > 1 else data.num_classes
    layer_based = config.strategy == "layer-based"
    measured = {"sample": 0.0, "gather": 0.0, "train": 0.0, "embed": 0.0}
    state.partitions = {}
    hot_global = set(int(v) for v in state.hot_list)

    if state.store is not None:
        state.store.reset_epoch(window_start=plan.first_global_batch)

    # static feature cache for the cached-gather baselines (accounting only)
    static_cache: set = set()
    if config.strategy in ("case3", "case4"):
        budget = config.preset.cache_budget_bytes
        if config.strategy == "case4":
            budget = max(0.0, budget - (graph.num_vertices + 1 + graph.num_edges) * 8.0)
        k = int(budget // (feat_dim * REAL_SIZE))
        if k > 0:
            by_degree = np.argsort(-graph.degrees, kind="stable")[:k]
            static_cache = set(int(v) for v in by_degree)
        if plan.epoch == 0 and static_cache:
            report.transfers.add("raw-features", len(static_cache) * feat_dim)

    shapes = []
    stacks_for_sim = {}
    injected_per_batch: dict[int, int] = {}
    cold_rows_per_batch: dict[int, int] = {}
    staged_per_sb: dict[int, int] = {}
    hot_sample_edges: dict[int, float] = {}
    embed_flops: dict[int, float] = {}
    dims = state.params.dims

    profile_hint = {
        "feat_dim": feat_dim,
        "emb_dim": emb_dim,
        "topology_bytes": (graph.num_vertices + 1 + graph.num_edges) * 8.0,
        "max_activation_bytes": 0.0,
        "embed_flops_per_vertex": 3.0 * (2.0 * config.fanouts[0] * feat_dim
                                         + 2.0 * feat_dim * emb_dim),
    }

    cell = _ParamCell() if pipelined else None
    stage_jobs: queue_mod.Queue | None = None
    done_events: dict[int, threading.Event] = {}
    worker_error: list = []

    def _stage_chunk(target_sb: int, chunk_verts: np.ndarray, version: int,
                     bottom_weights: list, hot_seed: int):
        t0 = time.perf_counter()
        block, emb = _compute_chunk_embeddings(
            graph, data, config, chunk_verts, bottom_weights, hot_seed
        )
        for row, v in enumerate(block.dst_vertices):
            state.store.put(int(v), emb[row], version, target_sb)
        hot_sample_edges[target_sb] = hot_sample_edges.get(target_sb, 0.0) + block.n_edges
        embed_flops[target_sb] = embed_flops.get(target_sb, 0.0) + (
            3.0 * (2.0 * block.n_edges * feat_dim
                   + 2.0 * block.n_dst * feat_dim * emb_dim)
        )
        report.stage_events.append((target_sb, version, int(block.n_dst)))
        measured["embed"] += time.perf_counter() - t0

    if pipelined:
        stage_jobs = queue_mod.Queue()

        def _worker():
            try:
                while True:
                    job = stage_jobs.get()
                    if job is None:
                        return
                    target_sb, chunks, hot_seed = job
                    for version, verts in chunks:
                        weights = cell.wait_for(version)
                        _stage_chunk(target_sb, verts, version, weights, hot_seed)
                    done_events[target_sb].set()
            except BaseException as exc:  # surfaced at the next barrier
                worker_error.append(exc)
                for ev in done_events.values():
                    ev.set()

        worker = threading.Thread(target=_worker, name="slow-role", daemon=True)
        worker.start()
        cell.publish(state.params.version, state.params.weights[0])

    try:
        for g, group in enumerate(plan.groups):
            queue_next = plan.queues.get(g + 1)
            if layer_based and queue_next is not None and queue_next.size:
                state.partitions[g + 1] = _partition_for_group(
                    config, state, queue_next, profile_hint
                )
                staged_queue = state.partitions[g + 1].cpu_compute
                staged_per_sb[g + 1] = staged_queue.size
            else:
                staged_queue = np.empty(0, np.int64)

            if pipelined and staged_queue.size:
                bounds = runplan.chunk_bounds(staged_queue.size, len(group))
                chunks = [
                    (plan.first_global_batch + group[j], staged_queue[lo:hi])
                    for j, (lo, hi) in enumerate(bounds) if hi > lo
                ]
                done_events[g + 1] = threading.Event()
                stage_jobs.put((g + 1, chunks, plan.hot_seeds[g + 1]))

            part = state.partitions.get(g) if layer_based else None
            cpu_set = part.compute_set() if part else set()
            cache_set = part.cache_set() if part else static_cache
            if part:
                new_cached = cache_set - state.cached_now
                if new_cached:
                    report.transfers.add("raw-features", len(new_cached) * feat_dim)
                state.cached_now = set(cache_set)

            if layer_based and g > 0 and staged_per_sb.get(g, 0) > 0:
                count = staged_per_sb[g]
                emb_elems, aux_elems = staging_elements(count, emb_dim)
                report.transfers.add(KIND_EMB, emb_elems)
                report.transfers.add(KIND_AUX, aux_elems)

            for j, b in enumerate(group):
                global_batch = plan.first_global_batch + b
                seeds = plan.batches[b]

                t0 = time.perf_counter()
                if layer_based and cpu_set:
                    stack = sample_khop_skip_hot(
                        graph, seeds, fanouts,
                        np.fromiter(cpu_set, dtype=np.int64, count=len(cpu_set)),
                        plan.batch_seeds[b],
                    )
                else:
                    stack = sample_khop(graph, seeds, fanouts, plan.batch_seeds[b])
                measured["sample"] += time.perf_counter() - t0

                if not pipelined and staged_queue.size:
                    bounds = runplan.chunk_bounds(staged_queue.size, len(group))
                    lo, hi = bounds[j]
                    if hi > lo:
                        _stage_chunk(g + 1, staged_queue[lo:hi],
                                     state.params.version,
                                     state.params.weights[0],
                                     plan.hot_seeds[g + 1])

                # historical-embedding injection for this batch
                inject_idx = np.empty(0, np.int64)
                inject_values = np.empty((0, emb_dim))
                fallbacks = 0
                reuse = 0
                bottom_dst = stack.blocks[0].dst_vertices
                if layer_based and config.layers > 1 and cpu_set and g > 0:
                    idx_list = []
                    val_list = []
                    for i, v in enumerate(bottom_dst):
                        if int(v) in cpu_set:
                            emb = state.store.get(int(v), global_batch)
                            if emb is None:
                                fallbacks += 1
                            else:
                                idx_list.append(i)
                                val_list.append(emb)
                    if idx_list:
                        inject_idx = np.array(idx_list, dtype=np.int64)
                        inject_values = np.stack(val_list)
                    reuse = inject_idx.size
                elif layer_based and g == 0 and hot_global:
                    report.warmup_computed += sum(
                        1 for v in bottom_dst if int(v) in hot_global
                    )

                t0 = time.perf_counter()
                injected_mask = np.zeros(bottom_dst.shape[0], dtype=bool)
                injected_mask[inject_idx] = True
                rec = batch_gather_accounting(stack, feat_dim, injected_mask,
                                              cache_set)
                rec.reuse_hits = reuse
                rec.fallbacks = fallbacks
                if layer_based and config.layers > 1:
                    rec.add(KIND_GRAD, sum(w.size for w in state.params.weights[0]))
                measured["gather"] += time.perf_counter() - t0

                t0 = time.perf_counter()
                loss, max_delta = _train_batch(
                    graph, data, config, state, stack,
                    seeds, inject_idx, inject_values,
                )
                measured["train"] += time.perf_counter() - t0
                if pipelined:
                    cell.publish(state.params.version, state.params.weights[0])

                report.losses.append(loss)
                report.max_weight_deltas.append(max_delta)
                report.transfers.merge(rec)
                injected_per_batch[b] = int(inject_idx.size)
                cold_rows_per_batch[b] = rec.raw_rows
                shapes.append(shape_from_stack(stack, b, g, dims, config.model))
                stacks_for_sim[b] = stack
                report.batch_rows.append({
                    "epoch": plan.epoch, "batch": global_batch,
                    "super_batch": g, "loss": loss,
                    "reuse_hits": reuse, "fallbacks": fallbacks,
                    "raw_rows": rec.raw_rows,
                    "cache_hit_rows": rec.cache_hit_rows,
                    "raw_elems": rec.elements["raw-features"],
                    "emb_elems": rec.elements[KIND_EMB],
                    "aux_elems": rec.elements[KIND_AUX],
                    "grad_elems": rec.elements[KIND_GRAD],
                    "max_weight_delta": max_delta,
                })
                state.global_batch = global_batch + 1

            # epsilon per super-batch: max weight step in the group x 2n
            group_deltas = report.max_weight_deltas[-len(group):]
            report.epsilon_trace.append(
                max(group_deltas) * 2 * config.super_batch_n
            )

            # super-batch boundary: staging must be complete before the next
            # super-batch may consume it
            if layer_based and state.store is not None:
                if pipelined and (g + 1) in done_events:
                    done_events[g + 1].wait()
                    if worker_error:
                        raise worker_error[0]
                if g + 1 < len(plan.groups):
                    next_first = plan.first_global_batch + plan.groups[g + 1][0]
                    state.store.advance_super_batch(
                        window_start=next_first,
                        window_len=len(plan.groups[g + 1]),
                    )
            if pipelined:
                cell.prune(state.params.version - 2 * config.super_batch_n)

            # deterministic idle feedback from the isolated super-batch sim
            if layer_based and config.simulate_costs:
                state.idle_ema = _update_idle_ema(
                    config, state, shapes, group, staged_per_sb.get(g + 1, 0),
                    hot_sample_edges.get(g + 1, 0.0),
                    embed_flops.get(g + 1, 0.0),
                )
    finally:
        if pipelined:
            stage_jobs.put(None)
            worker.join(timeout=10.0)

    fallback_total = report.transfers.fallbacks
    reuse_total = report.transfers.reuse_hits
    if reuse_total + fallback_total > 0:
        frac = fallback_total / (reuse_total + fallback_total)
        if frac > config.max_fallback_frac:
            raise FallbackBudgetExceeded(
                f"fallback fraction {frac:.2f} exceeds configured "
                f"{config.max_fallback_frac:.2f}"
            )

    if state.store is not None:
        report.max_gap = state.store.max_observed_gap
        report.max_gap_batch = state.store.max_gap_batch
        report.max_gap_super_batch = state.store.max_gap_super_batch

    report.stage_seconds_measured = measured

    if config.simulate_costs:
        profile = WorkloadProfile(
            shapes=shapes, feat_dim=feat_dim, emb_dim=emb_dim,
            num_vertices=graph.num_vertices, num_edges=graph.num_edges,
            super_batch_n=config.super_batch_n,
        )
        sim = simulate_strategy(
            profile, config, static_cache,
            injected_per_batch, cold_rows_per_batch, staged_per_sb,
            hot_sample_edges, embed_flops,
        )
        report.sim_makespan = sim.makespan
        report.sim_utilization = sim.utilization
        report.sim_memory_high_water = sim.memory_high_water
        by_stage: dict[str, float] = {}
        for ev in sim.trace.events:
            by_stage[ev.stage] = by_stage.get(ev.stage, 0.0) + (ev.end - ev.start)
        report.stage_seconds_simulated = by_stage
        report.sim_events = sim.trace.events
        state.sim_events.extend(sim.trace.events)
    return report


def _update_idle_ema(config, state, shapes, group, staged_next,
                     hot_edges_next, embed_flops_next) -> float:
    """Fast-role idle estimate: slow-role staging span minus fast-role span
    in the isolated super-batch simulation."""
    preset = config.preset
    group_shapes = [s for s in shapes if s.batch in group]
    fast_span = sum(
        s.train_flops / preset.fast.compute_rate
        + s.edges_sampled / preset.fast.sample_rate
        for s in group_shapes
    )
    slow_span = (
        embed_flops_next / preset.slow.compute_rate
        + hot_edges_next / preset.slow.sample_rate
    )
    idle = max(0.0, slow_span - fast_span)
    return 0.7 * state.idle_ema + 0.3 * idle


def simulate_strategy(profile: WorkloadProfile, config: TrainConfig,
                      static_cache: set,
                      injected_per_batch: dict, cold_rows_per_batch: dict,
                      staged_per_sb: dict, hot_sample_edges: dict,
                      embed_flops: dict,
                      pipelined: bool = True) -> SimResult:
    if config.strategy == "layer-based":
        tasks = build_layer_based_skeleton(
            profile, injected_per_batch, cold_rows_per_batch,
            staged_per_sb, hot_sample_edges, embed_flops,
        )
    else:
        tasks = build_baseline_skeleton(
            profile, config.strategy, cached=static_cache, pipelined=pipelined,
        )
    return simulate(tasks, config.preset.devices, config.preset.link)


# ---------------------------------------------------------------------------
# evaluation and the public entry points
# ---------------------------------------------------------------------------

def full_graph_block(graph: Graph) -> Block:
    ids = np.arange(graph.num_vertices, dtype=np.int64)
    edge_dst = np.repeat(ids, graph.degrees)
    return Block(dst_vertices=ids, src_vertices=ids,
                 edge_src=graph.targets.astype(np.int64), edge_dst=edge_dst)


def evaluate(graph: Graph, data: VertexData, params: ModelParams) -> dict:
    """Exact full-neighborhood inference accuracy on the val/test masks."""
    block = full_graph_block(graph)
    h = data.features
    for l in range(params.num_layers):
        h, _ = layer_forward(params.model, block, h, params.weights[l],
                             activation=l < params.num_layers - 1)
    pred = h.argmax(axis=1)
    out = {}
    for name, mask in (("val", data.val_mask), ("test", data.test_mask)):
        out[name] = float((pred[mask] == data.labels[mask]).mean()) if mask.any() else 0.0
    return out


def run_training(graph: Graph, data: VertexData,
                 config: TrainConfig) -> list[EpochReport]:
    """Execute the epoch loop under the configured strategy.

    The four baselines share the layer-split numerical path with an empty hot
    set, so any two strategies agree batch-for-batch on losses under the same
    seed; layer-based with hot_ratio=0 degenerates to the same numbers.
    """
    config.validate()
    dims = config.dims(data.feat_dim, data.num_classes)
    params = init_params(config.model, dims, config.seed)

    hot_list = np.empty(0, dtype=np.int64)
    if (config.strategy == "layer-based" and config.hot_ratio > 0
            and config.layers > 1):
        train_ids = np.nonzero(data.train_mask)[0].astype(np.int64)
        table = estimate_hotness(
            graph, train_ids, Fanouts(tuple(config.fanouts)),
            config.presample_rounds, config.seed,
            batch_size=config.batch_size,
        )
        hot_list = select_hot(table, config.hot_ratio)

    store = None
    emb_dim = config.hidden_dim if config.layers > 1 else data.num_classes
    if config.strategy == "layer-based":
        store = EmbeddingStore(n=config.super_batch_n, emb_dim=emb_dim)

    state = _RunState(params=params, store=store, hot_list=hot_list)
    reports = []
    first_global_batch = 0
    for epoch in range(config.epochs):
        plan = build_epoch_plan(graph, data, config, hot_list, epoch,
                                first_global_batch)
        pipelined = (config.execution == "pipelined"
                     and config.strategy == "layer-based")
        report = _run_epoch(graph, data, config, state, plan, pipelined)
        accs = evaluate(graph, data, state.params)
        report.val_accuracy = accs["val"]
        report.test_accuracy = accs["test"]
        reports.append(report)
        first_global_batch += len(plan.batches)
    return reports


def epsilon_monitor(max_weight_deltas: list[float], n: int,
                    batches_per_super_batch: int | None = None) -> list[float]:
    """Per-super-batch staleness diagnostic: max weight step x 2n.

    Standalone form of the in-loop monitor for post-hoc traces.
    """
    size = batches_per_super_batch or n
    out = []
    for i in range(0, len(max_weight_deltas), size):
        window = max_weight_deltas[i:i + size]
        out.append(max(window) * 2 * n if window else 0.0)
    return out
