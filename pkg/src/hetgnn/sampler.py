"""Fanout-bounded k-hop neighbor sampling over CSR graphs.

Sampling walks outward from the seed vertices; the produced stack lists
blocks bottom layer first, and each block's source frontier begins with its
destination vertices (so upper layers always have the self rows they need).
RNG streams are derived per (call seed, layer, destination vertex), which
makes draws independent of batch composition and execution schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .kernels import derive_seed, sample_layer, stable_unique

_SAMPLE_TAG = 0x5A


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class Fanouts:
    """Per-layer neighbor caps, outermost (bottom) layer first."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.counts:
            raise SamplerError("fanouts must not be empty")
        if any(c < 1 for c in self.counts):
            raise SamplerError(f"fanouts must all be >= 1, got {self.counts}")

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i: int) -> int:
        return self.counts[i]


@dataclass
class Block:
    """One layer's bipartite sampled subgraph.

    ``src_vertices`` starts with ``dst_vertices`` (same order), followed by
    newly sampled vertices in first-occurrence order. Edges are local index
    pairs sorted by (dst, src), which fixes the aggregation order.
    """

    dst_vertices: np.ndarray  # global ids
    src_vertices: np.ndarray  # global ids; prefix == dst_vertices
    edge_src: np.ndarray  # local indices into src_vertices
    edge_dst: np.ndarray  # local indices into dst_vertices

    @property
    def n_dst(self) -> int:
        return self.dst_vertices.shape[0]

    @property
    def n_src(self) -> int:
        return self.src_vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edge_src.shape[0]

    def edge_src_global(self) -> np.ndarray:
        return self.src_vertices[self.edge_src]

    def edge_dst_global(self) -> np.ndarray:
        return self.dst_vertices[self.edge_dst]

    def sampled_in_degree(self) -> np.ndarray:
        return np.bincount(self.edge_dst, minlength=self.n_dst).astype(np.int64)


@dataclass
class SampledBlockStack:
    """L blocks ordered bottom layer first, plus bottom-frontier hot flags."""

    blocks: list[Block]
    seeds: np.ndarray
    hot_flags: np.ndarray = field(default=None)  # bool, aligned to blocks[0].src

    def __post_init__(self):
        if self.hot_flags is None:
            self.hot_flags = np.zeros(self.blocks[0].n_src, dtype=bool)

    @property
    def num_layers(self) -> int:
        return len(self.blocks)

    def bottom_src(self) -> np.ndarray:
        return self.blocks[0].src_vertices

    def total_sampled_edges(self) -> int:
        return sum(b.n_edges for b in self.blocks)


def _expand_frontier(graph: Graph, frontier: np.ndarray, fanout: int,
                     stream_seed: int) -> Block:
    edge_dst_local, edge_src_global = sample_layer(
        graph.offsets, graph.targets, frontier, fanout, stream_seed
    )
    emitted = np.concatenate([frontier, edge_src_global])
    src_vertices, inverse = stable_unique(emitted)
    edge_src_local = inverse[frontier.shape[0]:]
    order = np.lexsort((edge_src_local, edge_dst_local))
    return Block(
        dst_vertices=frontier,
        src_vertices=src_vertices,
        edge_src=edge_src_local[order],
        edge_dst=edge_dst_local[order],
    )


def _check_seeds(graph: Graph, seeds: np.ndarray) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size == 0:
        raise SamplerError("seeds must not be empty")
    if seeds.min() < 0 or seeds.max() >= graph.num_vertices:
        raise SamplerError("seed vertex id out of range")
    return seeds


def sample_khop(graph: Graph, seeds: np.ndarray, fanouts: Fanouts,
                rng_seed: int) -> SampledBlockStack:
    """Sample the k-hop block stack for a batch of seed vertices.

    Per destination with degree d and fanout f: all neighbors appear exactly
    once when d <= f, otherwise f are drawn uniformly without replacement.
    Deterministic for a fixed ``rng_seed``.
    """
    seeds = _check_seeds(graph, seeds)
    num_layers = len(fanouts)
    blocks: list[Block] = [None] * num_layers
    frontier = seeds
    for layer in range(num_layers - 1, -1, -1):
        stream_seed = derive_seed(rng_seed, _SAMPLE_TAG, layer)
        block = _expand_frontier(graph, frontier, fanouts[layer], stream_seed)
        blocks[layer] = block
        frontier = block.src_vertices
    return SampledBlockStack(blocks=blocks, seeds=seeds)


def sample_khop_skip_hot(graph: Graph, seeds: np.ndarray, fanouts: Fanouts,
                         hot_set: np.ndarray, rng_seed: int) -> SampledBlockStack:
    """Like :func:`sample_khop`, flagging bottom-frontier vertices in ``hot_set``.

    Flagged vertices are the ones whose raw features the trainer will not
    gather. Sampling decisions are identical to ``sample_khop`` under the
    same seed: the hot set changes flags only, never topology.
    """
    stack = sample_khop(graph, seeds, fanouts, rng_seed)
    hot = np.asarray(list(hot_set) if isinstance(hot_set, set) else hot_set,
                     dtype=np.int64)
    if hot.size:
        stack.hot_flags = np.isin(stack.blocks[0].src_vertices, hot)
    return stack


def sample_one_hop_hot(graph: Graph, hot_vertices: np.ndarray, fanout: int,
                       rng_seed: int, layer: int = 0) -> Block:
    """One-hop block whose destinations are the given hot vertices.

    Per-destination semantics match a single layer of :func:`sample_khop`.
    """
    hot_vertices = np.asarray(hot_vertices, dtype=np.int64)
    if hot_vertices.size == 0:
        raise SamplerError("hot vertex list must not be empty")
    if np.unique(hot_vertices).shape[0] != hot_vertices.shape[0]:
        raise SamplerError("hot vertex list must be deduplicated")
    if hot_vertices.min() < 0 or hot_vertices.max() >= graph.num_vertices:
        raise SamplerError("hot vertex id out of range")
    stream_seed = derive_seed(rng_seed, _SAMPLE_TAG, layer)
    return _expand_frontier(graph, hot_vertices, fanout, stream_seed)
