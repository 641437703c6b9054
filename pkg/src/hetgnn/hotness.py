"""Pre-sampling hotness estimation and the hybrid hot-set partition.

Hotness counts how often each vertex lands in the bottom sampled frontier
over repeated simulated epochs. The hybrid partition walks the hot list,
moving the hottest vertices to fast-device feature caching while the fast
device reports idle time and has memory to spare.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .kernels import count_into, derive_seed
from .sampler import Fanouts, sample_khop

_PRESAMPLE_TAG = 0x70
REAL_SIZE = 8


class HotnessError(ValueError):
    pass


@dataclass
class HotnessTable:
    """Per-vertex access counters plus the deterministic ranking."""

    counts: np.ndarray  # int64 per vertex
    rounds: int
    rank: np.ndarray = field(default=None)  # vertex ids, hottest first

    def __post_init__(self):
        if self.rank is None:
            # descending count, ties broken by ascending vertex id
            order = np.lexsort(
                (np.arange(self.counts.shape[0]), -self.counts)
            )
            self.rank = order.astype(np.int64)


@dataclass
class FeedbackSnapshot:
    """What the coordinator observed about the fast device last super-batch."""

    observed_fast_idle_time: float  # seconds (EMA-smoothed by the caller)
    free_fast_memory: float  # bytes available for caching


@dataclass
class HotSetPartition:
    """Split of the hot list into slow-compute and fast-cache duties."""

    cpu_compute: np.ndarray  # vertex ids, hotness order
    gpu_cache: np.ndarray  # vertex ids, hotness order
    hot_ratio: float = 0.0

    def cache_set(self) -> set:
        return set(int(v) for v in self.gpu_cache)

    def compute_set(self) -> set:
        return set(int(v) for v in self.cpu_compute)

    def gpu_cache_bytes(self, feat_dim: int) -> int:
        return self.gpu_cache.shape[0] * feat_dim * REAL_SIZE


def estimate_hotness(graph: Graph, train_set: np.ndarray, fanouts: Fanouts,
                     rounds: int, seed: int,
                     batch_size: int | None = None) -> HotnessTable:
    """Run ``rounds`` simulated sampling epochs and count bottom-frontier hits.

    Each round shuffles the training vertices, samples every batch with the
    production sampler, and bumps a counter for every bottom-block source
    occurrence. Deterministic per seed; round r of a longer run reproduces
    round r of a shorter one, so counts grow monotonically with rounds.
    """
    if rounds < 1:
        raise HotnessError(f"presample rounds must be >= 1, got {rounds}")
    train_set = np.asarray(train_set, dtype=np.int64)
    if train_set.size == 0:
        raise HotnessError("train set must not be empty")
    if batch_size is None:
        batch_size = train_set.shape[0]
    counts = np.zeros(graph.num_vertices, dtype=np.int64)
    for r in range(rounds):
        gen = np.random.Generator(
            np.random.Philox(key=derive_seed(seed, _PRESAMPLE_TAG, r))
        )
        order = train_set[gen.permutation(train_set.shape[0])]
        for b, start in enumerate(range(0, order.shape[0], batch_size)):
            seeds = order[start:start + batch_size]
            stack = sample_khop(
                graph, seeds, fanouts,
                derive_seed(seed, _PRESAMPLE_TAG, r, b)
            )
            count_into(counts, stack.blocks[0].src_vertices)
    return HotnessTable(counts=counts, rounds=rounds)


def select_hot(table: HotnessTable, hot_ratio: float) -> np.ndarray:
    """First floor(hot_ratio * V) vertices of the ranking, hottest first."""
    if not (0.0 <= hot_ratio <= 1.0):
        raise HotnessError(f"hot ratio must be in [0, 1], got {hot_ratio}")
    k = int(hot_ratio * table.rank.shape[0])
    return table.rank[:k].copy()


def partition_hot(hot_list: np.ndarray, feedback: FeedbackSnapshot,
                  feat_dim: int, emb_dim: int,
                  est_slow_time_per_vertex: float = 0.0) -> HotSetPartition:
    """Rebalance hot vertices between slow-compute and fast feature caching.

    Worklist loop: while the fast device reported idle time and its free
    memory admits another raw feature row, move the next-hottest vertex from
    cpu_compute to gpu_cache. ``est_slow_time_per_vertex`` (when supplied by
    a caller that can estimate it) decrements the idle budget per move so the
    loop also stops once the projected idle time is consumed.
    """
    hot = np.asarray(hot_list, dtype=np.int64)
    if hot.size == 0:
        return HotSetPartition(cpu_compute=hot.copy(), gpu_cache=hot.copy())
    row_bytes = feat_dim * REAL_SIZE
    idle = float(feedback.observed_fast_idle_time)
    mem = float(feedback.free_fast_memory)
    moved = 0
    while (moved < hot.shape[0] and idle > 0.0 and mem >= row_bytes):
        moved += 1
        mem -= row_bytes
        idle -= est_slow_time_per_vertex
    return HotSetPartition(
        cpu_compute=hot[moved:].copy(),
        gpu_cache=hot[:moved].copy(),
    )
