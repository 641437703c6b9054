"""Exact transfer-volume accounting for sampled block stacks.

All quantities are element counts (reals); bytes are elements times
REAL_SIZE. The trainer accumulates these as it moves data; tests recompute
them independently from stack shapes, and the two must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampler import SampledBlockStack

REAL_SIZE = 8

KIND_RAW = "raw-features"
KIND_EMB = "hot-embeddings"
KIND_AUX = "backward-aux"
KIND_GRAD = "gradients"


@dataclass
class TransferRecord:
    """Element counts by transfer kind, plus hit/fallback tallies."""

    elements: dict = field(default_factory=lambda: {
        KIND_RAW: 0, KIND_EMB: 0, KIND_AUX: 0, KIND_GRAD: 0,
    })
    raw_rows: int = 0
    cache_hit_rows: int = 0
    reuse_hits: int = 0
    fallbacks: int = 0
    warmup_computed: int = 0

    def add(self, kind: str, elems: int) -> None:
        self.elements[kind] += int(elems)

    def total_elements(self) -> int:
        return sum(self.elements.values())

    def total_bytes(self) -> int:
        return self.total_elements() * REAL_SIZE

    def bytes_by_kind(self) -> dict:
        return {k: v * REAL_SIZE for k, v in self.elements.items()}

    def merge(self, other: "TransferRecord") -> None:
        for k, v in other.elements.items():
            self.elements[k] += v
        self.raw_rows += other.raw_rows
        self.cache_hit_rows += other.cache_hit_rows
        self.reuse_hits += other.reuse_hits
        self.fallbacks += other.fallbacks
        self.warmup_computed += other.warmup_computed


def needed_bottom_rows(stack: SampledBlockStack,
                       computed_dst_mask: np.ndarray) -> np.ndarray:
    """Which bottom-frontier rows the computed part of the bottom layer reads.

    A source row is needed when it feeds at least one computed destination,
    or when it is the self row of a computed destination (the source frontier
    begins with the destination list). With nothing injected this marks every
    row, matching the baseline full-frontier gather.
    """
    bottom = stack.blocks[0]
    needed = np.zeros(bottom.n_src, dtype=bool)
    computed_edges = computed_dst_mask[bottom.edge_dst]
    needed[bottom.edge_src[computed_edges]] = True
    needed[:bottom.n_dst] |= computed_dst_mask
    return needed


def raw_gather_elements(stack: SampledBlockStack, feat_dim: int) -> int:
    """Baseline path: the full bottom frontier's raw features move."""
    return stack.blocks[0].n_src * feat_dim


def pure_layer_split_elements(stack: SampledBlockStack, emb_dim: int) -> int:
    """Full layer-split path: per bottom destination, the aggregated
    representation and the computed embedding move instead of raw rows."""
    return 2 * stack.blocks[0].n_dst * emb_dim


def batch_gather_accounting(
    stack: SampledBlockStack,
    feat_dim: int,
    injected_dst_mask: np.ndarray,
    cached_ids: set,
) -> TransferRecord:
    """Per-batch raw-feature accounting given injections and a feature cache.

    Rows needed by the computed part are transferred unless their vertex sits
    in the fast-device feature cache.
    """
    bottom = stack.blocks[0]
    rec = TransferRecord()
    computed = ~injected_dst_mask
    needed = needed_bottom_rows(stack, computed)
    idx = np.nonzero(needed)[0]
    if cached_ids:
        hit = np.fromiter(
            (int(v) in cached_ids for v in bottom.src_vertices[idx]),
            dtype=bool, count=idx.shape[0],
        )
    else:
        hit = np.zeros(idx.shape[0], dtype=bool)
    n_hit = int(hit.sum())
    n_raw = idx.shape[0] - n_hit
    rec.raw_rows = n_raw
    rec.cache_hit_rows = n_hit
    rec.add(KIND_RAW, n_raw * feat_dim)
    return rec


def staging_elements(staged_count: int, emb_dim: int) -> tuple[int, int]:
    """Per super-batch: one embedding row plus one aggregate row per staged
    vertex (the aggregate lets the fast device run the bottom backward
    locally)."""
    return staged_count * emb_dim, staged_count * emb_dim
