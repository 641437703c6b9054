"""Deterministic per-epoch planning shared by the trainer and the profiler.

Everything that depends on randomness is derived from (seed, epoch, index)
streams, so the trainer, the workload profiler, and any replay oracle see
the same shuffles, batches, and sampling seeds.
"""

from __future__ import annotations

import numpy as np

from .kernels import derive_seed

_SHUFFLE_TAG = 0x11
_BATCH_TAG = 0x22
_HOT_TAG = 0x33
_QUEUE_TAG = 0x44


def shuffle_epoch(train_ids: np.ndarray, seed: int, epoch: int) -> np.ndarray:
    gen = np.random.Generator(
        np.random.Philox(key=derive_seed(seed, _SHUFFLE_TAG, epoch))
    )
    return train_ids[gen.permutation(train_ids.shape[0])]


def split_batches(order: np.ndarray, batch_size: int) -> list[np.ndarray]:
    return [order[i:i + batch_size] for i in range(0, order.shape[0], batch_size)]


def super_batch_groups(num_batches: int, n: int) -> list[list[int]]:
    """Consecutive n batches per super-batch; the final group may be shorter."""
    return [list(range(i, min(i + n, num_batches))) for i in range(0, num_batches, n)]


def batch_sample_seed(seed: int, epoch: int, batch_idx: int) -> int:
    return derive_seed(seed, _BATCH_TAG, epoch, batch_idx)


def hot_sample_seed(seed: int, epoch: int, super_batch: int) -> int:
    return derive_seed(seed, _HOT_TAG, epoch, super_batch)


def queue_replay_seed(seed: int, epoch: int, super_batch: int) -> int:
    return derive_seed(seed, _QUEUE_TAG, epoch, super_batch)


def chunk_bounds(total: int, parts: int) -> list[tuple[int, int]]:
    """Split ``total`` items into ``parts`` contiguous chunks, sizes within 1."""
    base, extra = divmod(total, parts)
    bounds = []
    start = 0
    for j in range(parts):
        size = base + (1 if j < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds
