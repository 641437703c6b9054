"""Transfer accounting identities, including the published layer-size example."""

import numpy as np

from hetgnn.sampler import Fanouts, sample_khop
from hetgnn.transfer import (
    batch_gather_accounting,
    needed_bottom_rows,
    pure_layer_split_elements,
    raw_gather_elements,
)
from hetgnn.workloads import fig7_shaped_stack


def test_all_cold_batch_transfers_full_frontier(powerlaw1k):
    graph, data = powerlaw1k
    stack = sample_khop(graph, np.arange(16), Fanouts((5, 5)), 3)
    bottom = stack.blocks[0]
    injected = np.zeros(bottom.n_dst, dtype=bool)
    rec = batch_gather_accounting(stack, data.feat_dim, injected, set())
    assert rec.raw_rows == bottom.n_src
    assert rec.elements["raw-features"] == bottom.n_src * data.feat_dim
    assert rec.cache_hit_rows == 0


def test_all_hot_staged_transfers_two_embedding_rows_per_dst(powerlaw1k):
    """feat_dim > 2*emb_dim makes the split transfer strictly smaller."""
    graph, data = powerlaw1k
    stack = sample_khop(graph, np.arange(16), Fanouts((5, 5)), 3)
    bottom = stack.blocks[0]
    emb_dim = data.feat_dim // 2 - 2
    split = pure_layer_split_elements(stack, emb_dim)
    raw = raw_gather_elements(stack, data.feat_dim)
    assert split == 2 * bottom.n_dst * emb_dim
    assert split < raw
    injected = np.ones(bottom.n_dst, dtype=bool)
    rec = batch_gather_accounting(stack, data.feat_dim, injected, set())
    assert rec.raw_rows == 0
    assert rec.elements["raw-features"] == 0


def test_fig7_shaped_instance_products_exact():
    """The published two-layer sizing: 86175 sources at dim 602 on the raw
    path versus 2 x 28706 x 256 on the layer-split path, exactly."""
    stack = fig7_shaped_stack()
    assert stack.blocks[0].n_src == 86175
    assert stack.blocks[0].n_dst == 28706
    assert np.array_equal(stack.blocks[0].dst_vertices,
                          stack.blocks[1].src_vertices)
    raw = raw_gather_elements(stack, feat_dim=602)
    split = pure_layer_split_elements(stack, emb_dim=256)
    assert raw == 86175 * 602
    assert split == 2 * 28706 * 256
    assert split < raw


def test_needed_rows_rule(powerlaw1k):
    graph, data = powerlaw1k
    stack = sample_khop(graph, np.arange(12), Fanouts((4, 4)), 9)
    bottom = stack.blocks[0]
    # nothing injected: every source row is needed
    all_needed = needed_bottom_rows(stack, np.ones(bottom.n_dst, dtype=bool))
    assert all_needed.all()
    # everything injected: nothing is needed
    none_needed = needed_bottom_rows(stack, np.zeros(bottom.n_dst, dtype=bool))
    assert not none_needed.any()
    # partial: needed rows = edge sources of computed dsts + their self rows
    computed = np.zeros(bottom.n_dst, dtype=bool)
    computed[::2] = True
    needed = needed_bottom_rows(stack, computed)
    expect = np.zeros(bottom.n_src, dtype=bool)
    for e in range(bottom.n_edges):
        if computed[bottom.edge_dst[e]]:
            expect[bottom.edge_src[e]] = True
    expect[:bottom.n_dst] |= computed
    assert np.array_equal(needed, expect)


def test_cache_hits_reduce_raw_rows(powerlaw1k):
    graph, data = powerlaw1k
    stack = sample_khop(graph, np.arange(12), Fanouts((4, 4)), 9)
    bottom = stack.blocks[0]
    injected = np.zeros(bottom.n_dst, dtype=bool)
    cached = set(int(v) for v in bottom.src_vertices[:10])
    rec = batch_gather_accounting(stack, data.feat_dim, injected, cached)
    assert rec.cache_hit_rows == 10
    assert rec.raw_rows == bottom.n_src - 10
    assert rec.elements["raw-features"] == (bottom.n_src - 10) * data.feat_dim
