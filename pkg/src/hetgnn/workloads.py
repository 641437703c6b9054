"""Shipped fixtures: named datasets, the example graph, and profiling helpers."""

from __future__ import annotations

import numpy as np

from . import runplan
from .graph import Graph, VertexData, build_csr, split_masks, synthetic_graph
from .sampler import Block, Fanouts, SampledBlockStack, sample_khop
from .skeletons import WorkloadProfile, shape_from_stack

SBM_SEED = 9001
POWERLAW_SEED = 9002


def sbm_fixture(num_vertices: int = 1000, feat_dim: int = 32,
                num_classes: int = 4, seed: int = SBM_SEED):
    """1000-vertex SBM with community-aligned labels; the convergence fixture."""
    return synthetic_graph(
        "sbm", num_vertices,
        {"blocks": num_classes, "p_in": 0.05, "p_out": 0.005},
        feat_dim=feat_dim, num_classes=num_classes, seed=seed,
    )


def powerlaw_fixture(num_vertices: int = 1000, feat_dim: int = 64,
                     num_classes: int = 8, seed: int = POWERLAW_SEED):
    """Skewed-degree fixture used for hotness, caching and simulator runs."""
    return synthetic_graph(
        "power-law", num_vertices,
        {"exponent": 2.5, "avg_degree": 10.0},
        feat_dim=feat_dim, num_classes=num_classes, seed=seed,
    )


def divergence_fixture(seed: int = 9003):
    """Two disconnected communities where degree and sampled frequency diverge.

    Training vertices all live in community A (flat degrees); community B
    holds the high-degree hubs that sampling never reaches. A degree cache
    fills up with B's hubs; a pre-sampling cache learns A's true traffic.
    """
    n_a, n_b = 500, 500
    gen = np.random.Generator(np.random.PCG64(seed))
    src = []
    dst = []
    # community A: sparse random regular-ish graph
    for v in range(n_a):
        nbrs = gen.choice(n_a, size=4, replace=False)
        for u in nbrs:
            if u != v:
                src.append(u)
                dst.append(v)
    # community B: star hubs with very high degree
    for hub in range(n_a, n_a + 10):
        for leaf in range(n_a + 10, n_a + n_b):
            src.append(hub)
            dst.append(leaf)
    graph = build_csr(np.array(src), np.array(dst), n_a + n_b,
                      symmetrize=True, add_self_loops=True)
    feats = gen.standard_normal((n_a + n_b, 16))
    labels = gen.integers(0, 4, size=n_a + n_b).astype(np.int64)
    train = np.zeros(n_a + n_b, dtype=bool)
    train[:n_a] = True
    val = np.zeros(n_a + n_b, dtype=bool)
    test = np.zeros(n_a + n_b, dtype=bool)
    test[n_a:] = True
    data = VertexData(features=feats, labels=labels, train_mask=train,
                      val_mask=val, test_mask=test)
    return graph, data


_EXAMPLE_EDGES = [
    (0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5),
    (4, 6), (5, 6), (5, 7), (6, 8), (7, 8),
]

# hand-counted undirected degrees of the 9-vertex example graph
EXAMPLE_DEGREES = [2, 3, 4, 4, 3, 3, 3, 2, 2]


def example_graph(add_self_loops: bool = False) -> Graph:
    """The 9-vertex two-layer walkthrough graph (training vertex 4)."""
    src = np.array([e[0] for e in _EXAMPLE_EDGES], dtype=np.int64)
    dst = np.array([e[1] for e in _EXAMPLE_EDGES], dtype=np.int64)
    return build_csr(src, dst, 9, symmetrize=True,
                     add_self_loops=add_self_loops)


def example_edge_lines() -> list[str]:
    return [f"{u} {v}" for u, v in _EXAMPLE_EDGES]


def fig7_shaped_stack(bottom_src: int = 86175, bottom_dst: int = 28706,
                      num_seeds: int = 10000) -> SampledBlockStack:
    """Shape-only two-layer stack matching the published layer-size example
    (bottom frontier 86175 at the feature dim, middle frontier 28706 at the
    hidden dim). Edges are minimal but structurally valid."""
    mid = np.arange(bottom_dst, dtype=np.int64)
    bot_src = np.arange(bottom_src, dtype=np.int64)
    edge_dst = np.repeat(mid, 2)
    extra = bottom_dst + (np.arange(bottom_dst, dtype=np.int64)
                          % (bottom_src - bottom_dst))
    edge_src = np.empty(2 * bottom_dst, dtype=np.int64)
    edge_src[0::2] = mid  # self edges
    edge_src[1::2] = extra
    order = np.lexsort((edge_src, edge_dst))
    bottom = Block(dst_vertices=mid, src_vertices=bot_src,
                   edge_src=edge_src[order], edge_dst=edge_dst[order])
    seeds = np.arange(num_seeds, dtype=np.int64)
    top_dst = np.repeat(seeds, 2)
    top_src = np.empty(2 * num_seeds, dtype=np.int64)
    top_src[0::2] = seeds
    top_src[1::2] = num_seeds + (np.arange(num_seeds, dtype=np.int64)
                                 % (bottom_dst - num_seeds))
    order = np.lexsort((top_src, top_dst))
    top = Block(dst_vertices=seeds, src_vertices=mid,
                edge_src=top_src[order], edge_dst=top_dst[order])
    return SampledBlockStack(blocks=[bottom, top], seeds=seeds)


def profile_epoch(graph: Graph, data: VertexData, *, fanouts, batch_size: int,
                  seed: int, epoch: int = 0, super_batch_n: int = 1,
                  dims: list[int] | None = None,
                  model: str = "gcn") -> WorkloadProfile:
    """Sample one epoch's stacks and summarize their shapes for the simulator.

    Uses the trainer's exact seed derivations, so the profiled stacks equal
    the ones any strategy would train on.
    """
    fan = Fanouts(tuple(fanouts))
    train_ids = np.nonzero(data.train_mask)[0].astype(np.int64)
    order = runplan.shuffle_epoch(train_ids, seed, epoch)
    batches = runplan.split_batches(order, batch_size)
    if dims is None:
        dims = [data.feat_dim] + [64] * (len(fan) - 1) + [max(data.num_classes, 2)]
    shapes = []
    stacks = []
    for b, seeds in enumerate(batches):
        stack = sample_khop(graph, seeds, fan,
                            runplan.batch_sample_seed(seed, epoch, b))
        sb = b // super_batch_n
        shapes.append(shape_from_stack(stack, b, sb, dims, model))
        stacks.append(stack)
    return WorkloadProfile(
        shapes=shapes, feat_dim=data.feat_dim,
        emb_dim=dims[1] if len(dims) > 2 else dims[-1],
        num_vertices=graph.num_vertices, num_edges=graph.num_edges,
        super_batch_n=super_batch_n, stacks=stacks,
    )
