"""Strategy trace skeletons: per-task work amounts plus the dependency DAG.

A skeleton is built from per-batch shape summaries (edge counts, frontier
sizes, flop estimates) and a strategy name; the device simulator turns it
into a timeline. The five strategies share identical numerical work and
differ only in where each stage runs and what crosses the link.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .devsim import ROLE_FAST, ROLE_SLOW, DeviceModel, LinkModel, SimTask
from .sampler import SampledBlockStack
from .transfer import REAL_SIZE

STRATEGIES = ("case1", "case2", "case3", "case4", "layer-based")

STAGE_SAMPLE = "sample"
STAGE_GATHER = "gather"
STAGE_TRAIN = "train"
STAGE_HOT_SAMPLE = "hot-sample"
STAGE_EMBED = "embed"
STAGE_STAGE_IN = "stage-in"


@dataclass
class BatchShape:
    """Shape summary of one training batch's sampled stack."""

    batch: int
    super_batch: int
    edges_sampled: int
    bottom_src: int
    bottom_dst: int
    train_flops: float
    bottom_flops: float
    bottom_src_ids: np.ndarray
    bottom_dst_ids: np.ndarray
    activation_bytes: float


@dataclass
class WorkloadProfile:
    shapes: list[BatchShape]
    feat_dim: int
    emb_dim: int
    num_vertices: int
    num_edges: int
    super_batch_n: int = 1
    stacks: list[SampledBlockStack] = field(default_factory=list)

    @property
    def feat_row_bytes(self) -> int:
        return self.feat_dim * REAL_SIZE

    def topology_bytes(self) -> float:
        return (self.num_vertices + 1 + self.num_edges) * 8.0


def estimate_stack_flops(stack: SampledBlockStack, dims: list[int],
                         model: str) -> tuple[float, float]:
    """(total forward+backward flops, bottom-layer share). Linear cost model:
    2*E*d per aggregation plus 2*rows*d_in*d_out per matmul, backward ~= 2x
    forward."""
    total = 0.0
    bottom = 0.0
    mats = 1 if model == "gcn" else 2
    for l, block in enumerate(stack.blocks):
        d_in, d_out = dims[l], dims[l + 1]
        fwd = 2.0 * block.n_edges * d_in + 2.0 * mats * block.n_dst * d_in * d_out
        layer = 3.0 * fwd
        total += layer
        if l == 0:
            bottom = layer
    return total, bottom


def shape_from_stack(stack: SampledBlockStack, batch: int, super_batch: int,
                     dims: list[int], model: str) -> BatchShape:
    flops, bottom_flops = estimate_stack_flops(stack, dims, model)
    act_bytes = sum(
        (b.n_src * dims[l] + 2.0 * b.n_dst * dims[l + 1]) * REAL_SIZE
        for l, b in enumerate(stack.blocks)
    )
    bottom = stack.blocks[0]
    return BatchShape(
        batch=batch,
        super_batch=super_batch,
        edges_sampled=stack.total_sampled_edges(),
        bottom_src=bottom.n_src,
        bottom_dst=bottom.n_dst,
        train_flops=flops,
        bottom_flops=bottom_flops,
        bottom_src_ids=bottom.src_vertices,
        bottom_dst_ids=bottom.dst_vertices,
        activation_bytes=act_bytes,
    )


def _hits(ids: np.ndarray, cached: set) -> int:
    if not cached:
        return 0
    return int(sum(1 for v in ids if int(v) in cached))


def build_baseline_skeleton(
    profile: WorkloadProfile,
    strategy: str,
    cached: set | None = None,
    pipelined: bool = True,
) -> list[SimTask]:
    """Skeletons for the four step-based orchestrations.

    case1: sample+gather slow. case2: sample fast, gather slow. case3: sample
    slow, gather via fast cache (misses collected slow and transferred).
    case4: sample and gather on fast with the topology resident there.
    """
    if strategy not in ("case1", "case2", "case3", "case4"):
        raise ValueError(f"not a baseline strategy: {strategy!r}")
    cached = cached or set()
    sample_role = ROLE_FAST if strategy in ("case2", "case4") else ROLE_SLOW
    cached_gather = strategy in ("case3", "case4")
    tasks: list[SimTask] = []
    if cached_gather and cached:
        tasks.append(SimTask(
            name="cache-load", role=ROLE_FAST, stage=STAGE_GATHER,
            work=float(len(cached)), kind="gather",
            bytes_moved=len(cached) * profile.feat_row_bytes,
            mem_persist=len(cached) * profile.feat_row_bytes,
        ))
    if strategy in ("case2", "case4"):
        tasks.append(SimTask(
            name="topo-load", role=ROLE_FAST, stage=STAGE_SAMPLE,
            bytes_moved=profile.topology_bytes(),
            mem_persist=profile.topology_bytes(),
        ))

    prev_train = None
    for sh in profile.shapes:
        i = sh.batch
        s_name, t_name = f"s{i}", f"t{i}"
        s_deps = []
        if not pipelined and prev_train is not None:
            s_deps.append(prev_train)
        tasks.append(SimTask(
            name=s_name, role=sample_role, stage=STAGE_SAMPLE, batch=i,
            super_batch=sh.super_batch, work=float(sh.edges_sampled),
            kind="sample", deps=tuple(s_deps),
        ))
        gather_deps = [s_name]
        train_deps = []
        if cached_gather:
            n_hit = _hits(sh.bottom_src_ids, cached)
            n_miss = sh.bottom_src - n_hit
            tasks.append(SimTask(
                name=f"gh{i}", role=ROLE_FAST, stage=STAGE_GATHER, batch=i,
                super_batch=sh.super_batch, work=float(n_hit), kind="gather",
                deps=(s_name,),
            ))
            tasks.append(SimTask(
                name=f"gm{i}", role=ROLE_SLOW, stage=STAGE_GATHER, batch=i,
                super_batch=sh.super_batch, work=float(n_miss), kind="gather",
                bytes_moved=n_miss * profile.feat_row_bytes,
                deps=(s_name,),
            ))
            train_deps += [f"gh{i}", f"gm{i}"]
        else:
            tasks.append(SimTask(
                name=f"g{i}", role=ROLE_SLOW, stage=STAGE_GATHER, batch=i,
                super_batch=sh.super_batch, work=float(sh.bottom_src),
                kind="gather",
                bytes_moved=sh.bottom_src * profile.feat_row_bytes,
                deps=tuple(gather_deps),
            ))
            train_deps.append(f"g{i}")
        tasks.append(SimTask(
            name=t_name, role=ROLE_FAST, stage=STAGE_TRAIN, batch=i,
            super_batch=sh.super_batch, work=sh.train_flops, kind="compute",
            deps=tuple(train_deps), mem_hold=sh.activation_bytes,
        ))
        prev_train = t_name
    return tasks


def build_layer_based_skeleton(
    profile: WorkloadProfile,
    injected_per_batch: dict[int, int],
    cold_rows_per_batch: dict[int, int],
    staged_per_super_batch: dict[int, int],
    hot_sample_edges: dict[int, float],
    embed_flops: dict[int, float],
) -> list[SimTask]:
    """Skeleton for the layer-split pipeline with its four stages.

    Per super-batch k the fast role finishes all sampling rounds before its
    training rounds; the slow role computes super-batch k+1's hot embeddings
    in chunks gated on the fast role's published parameter versions; staged
    embeddings move once per super-batch before training consumes them.
    """
    n = profile.super_batch_n
    tasks: list[SimTask] = []
    groups: dict[int, list[BatchShape]] = {}
    for sh in profile.shapes:
        groups.setdefault(sh.super_batch, []).append(sh)

    emb_row = profile.emb_dim * REAL_SIZE
    for k in sorted(groups):
        shapes = groups[k]
        sample_names = []
        for sh in shapes:
            name = f"s{sh.batch}"
            tasks.append(SimTask(
                name=name, role=ROLE_FAST, stage=STAGE_SAMPLE, batch=sh.batch,
                super_batch=k, work=float(sh.edges_sampled), kind="sample",
            ))
            sample_names.append(name)
        # slow role: one-hop sampling and staged embedding chunks for k+1
        staged = staged_per_super_batch.get(k + 1, 0)
        chunk_names = []
        if staged > 0:
            tasks.append(SimTask(
                name=f"hs{k + 1}", role=ROLE_SLOW, stage=STAGE_HOT_SAMPLE,
                super_batch=k, work=hot_sample_edges.get(k + 1, 0.0),
                kind="sample",
            ))
            per_chunk = embed_flops.get(k + 1, 0.0) / len(shapes)
            for j, sh in enumerate(shapes):
                deps = [f"hs{k + 1}"]
                if j > 0:
                    deps.append(f"t{shapes[j - 1].batch}")  # version k*n+j publish
                tasks.append(SimTask(
                    name=f"c{k + 1}.{j}", role=ROLE_SLOW, stage=STAGE_EMBED,
                    batch=sh.batch, super_batch=k, work=per_chunk,
                    kind="compute", deps=tuple(deps),
                ))
                chunk_names.append(f"c{k + 1}.{j}")
        # stage-in transfer for this super-batch (staged during k-1)
        stage_in = None
        my_staged = staged_per_super_batch.get(k, 0)
        if my_staged > 0:
            stage_in = f"in{k}"
            deps = tuple(
                name for name in (f"c{k}.{j}" for j in range(n))
                if any(t.name == name for t in tasks)
            )
            tasks.append(SimTask(
                name=stage_in, role=ROLE_FAST, stage=STAGE_STAGE_IN,
                super_batch=k, bytes_moved=2.0 * my_staged * emb_row,
                deps=deps, mem_persist=my_staged * emb_row,
            ))
        last_sample = sample_names[-1]
        for sh in shapes:
            g_name = f"g{sh.batch}"
            cold = cold_rows_per_batch.get(sh.batch, sh.bottom_src)
            tasks.append(SimTask(
                name=g_name, role=ROLE_SLOW, stage=STAGE_GATHER,
                batch=sh.batch, super_batch=k, work=float(cold),
                kind="gather", bytes_moved=cold * profile.feat_row_bytes,
                deps=(f"s{sh.batch}",),
            ))
            injected = injected_per_batch.get(sh.batch, 0)
            frac = injected / sh.bottom_dst if sh.bottom_dst else 0.0
            flops = sh.train_flops - sh.bottom_flops * frac
            deps = [g_name, last_sample]
            if stage_in is not None:
                deps.append(stage_in)
            tasks.append(SimTask(
                name=f"t{sh.batch}", role=ROLE_FAST, stage=STAGE_TRAIN,
                batch=sh.batch, super_batch=k, work=flops, kind="compute",
                deps=tuple(deps), mem_hold=sh.activation_bytes,
            ))
    return tasks
