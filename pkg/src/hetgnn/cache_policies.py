"""Feature-cache policy baselines and the hybrid comparison sweep.

Degree caches the highest-degree vertices' raw features; PreSample caches by
pre-sampling hotness; Hybrid spends the same budget on staged hot-vertex
embeddings first (cheap rows, and each one removes a whole sampled
neighborhood from the gather) and feature-caches the next-hottest vertices
with the remainder. Transfer volumes count everything that crosses the link:
cache loads, per-super-batch embedding staging, and per-batch raw misses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .hotness import HotnessTable
from .sampler import SampledBlockStack
from .transfer import REAL_SIZE, batch_gather_accounting, staging_elements


@dataclass
class PolicyOutcome:
    policy: str
    budget_bytes: float
    transfer_elements: int
    memory_bytes: float
    hit_rows: int
    needed_rows: int

    @property
    def hit_rate(self) -> float:
        return self.hit_rows / self.needed_rows if self.needed_rows else 0.0


def degree_cache(graph: Graph, budget_bytes: float, feat_dim: int) -> set:
    k = int(budget_bytes // (feat_dim * REAL_SIZE))
    if k <= 0:
        return set()
    order = np.argsort(-graph.degrees, kind="stable")[:k]
    return set(int(v) for v in order)


def presample_cache(table: HotnessTable, budget_bytes: float,
                    feat_dim: int) -> set:
    k = int(budget_bytes // (feat_dim * REAL_SIZE))
    return set(int(v) for v in table.rank[:k])


def hybrid_plan(table: HotnessTable, budget_bytes: float, feat_dim: int,
                emb_dim: int, hot_ratio: float = 0.2) -> tuple[np.ndarray, set]:
    """(staged hot vertices, feature-cache set) under one memory budget.

    The hottest vertices are both staged (their embeddings replace whole
    sampled neighborhoods) and feature-cached (they are also the most
    frequent raw rows), costing emb+feat bytes each; the remaining budget
    feature-caches the next-hottest vertices.
    """
    emb_row = emb_dim * REAL_SIZE
    feat_row = feat_dim * REAL_SIZE
    max_staged = int(hot_ratio * table.rank.shape[0])
    n_staged = min(max_staged, int(budget_bytes // (emb_row + feat_row)))
    staged = table.rank[:n_staged].copy()
    remaining = budget_bytes - n_staged * (emb_row + feat_row)
    n_cache = int(remaining // feat_row)
    cache = set(int(v) for v in table.rank[:n_staged + n_cache])
    return staged, cache


def _static_policy_transfer(stacks: list[SampledBlockStack], cached: set,
                            feat_dim: int) -> tuple[int, int, int]:
    transfer = len(cached) * feat_dim  # one-time cache load
    hits = 0
    needed = 0
    for stack in stacks:
        mask = np.zeros(stack.blocks[0].n_dst, dtype=bool)
        rec = batch_gather_accounting(stack, feat_dim, mask, cached)
        transfer += rec.elements["raw-features"]
        hits += rec.cache_hit_rows
        needed += rec.cache_hit_rows + rec.raw_rows
    return transfer, hits, needed


def _hybrid_transfer(groups: list[list[SampledBlockStack]], staged: np.ndarray,
                     cached: set, feat_dim: int, emb_dim: int) -> tuple[int, int, int]:
    staged_set = set(int(v) for v in staged)
    transfer = len(cached) * feat_dim
    hits = 0
    needed = 0
    for g, group in enumerate(groups):
        if g > 0 and staged_set:
            emb_elems, aux_elems = staging_elements(len(staged_set), emb_dim)
            transfer += emb_elems + aux_elems
        for stack in group:
            bottom_dst = stack.blocks[0].dst_vertices
            if g > 0 and staged_set:
                injected = np.fromiter(
                    (int(v) in staged_set for v in bottom_dst),
                    dtype=bool, count=bottom_dst.shape[0],
                )
            else:
                injected = np.zeros(bottom_dst.shape[0], dtype=bool)
            rec = batch_gather_accounting(stack, feat_dim, injected, cached)
            transfer += rec.elements["raw-features"]
            hits += rec.cache_hit_rows
            needed += rec.cache_hit_rows + rec.raw_rows
    return transfer, hits, needed


def compare_policies(
    graph: Graph,
    table: HotnessTable,
    groups: list[list[SampledBlockStack]],
    budgets: list[float],
    feat_dim: int,
    emb_dim: int,
    hot_ratio: float = 0.2,
) -> list[PolicyOutcome]:
    """Sweep the memory budget and report each policy's transfer volume."""
    stacks = [s for group in groups for s in group]
    out: list[PolicyOutcome] = []
    for budget in budgets:
        for name in ("degree", "presample", "hybrid"):
            if name == "degree":
                cached = degree_cache(graph, budget, feat_dim)
                transfer, hits, needed = _static_policy_transfer(
                    stacks, cached, feat_dim)
                mem = len(cached) * feat_dim * REAL_SIZE
            elif name == "presample":
                cached = presample_cache(table, budget, feat_dim)
                transfer, hits, needed = _static_policy_transfer(
                    stacks, cached, feat_dim)
                mem = len(cached) * feat_dim * REAL_SIZE
            else:
                staged, cached = hybrid_plan(table, budget, feat_dim, emb_dim,
                                             hot_ratio)
                transfer, hits, needed = _hybrid_transfer(
                    groups, staged, cached, feat_dim, emb_dim)
                mem = (staged.shape[0] * emb_dim
                       + len(cached) * feat_dim) * REAL_SIZE
            out.append(PolicyOutcome(
                policy=name, budget_bytes=budget,
                transfer_elements=int(transfer), memory_bytes=mem,
                hit_rows=hits, needed_rows=needed,
            ))
    return out
