"""Independent oracles: straight-loop dense math and a reference sampler.

These deliberately avoid the package's kernel helpers; they share only the
documented algorithm contracts (splitmix64 streams, partial Fisher-Yates,
block-local symmetric normalization) so they can catch implementation bugs.
"""

import numpy as np

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
PHI = 0x2545F4914F6CDD1D


def mix64_int(x: int) -> int:
    x &= MASK
    x = ((x ^ (x >> 30)) * MIX1) & MASK
    x = ((x ^ (x >> 27)) * MIX2) & MASK
    return (x ^ (x >> 31)) & MASK


def reference_sample(offsets, targets, dst_globals, fanout, stream_seed):
    """Plain-int reimplementation of the per-destination sampling contract.

    Returns a list of (dst_local, src_global) pairs in emission order.
    """
    base = mix64_int(((stream_seed & MASK) + GOLDEN) & MASK)
    out = []
    for i, v in enumerate(dst_globals):
        v = int(v)
        lo, hi = int(offsets[v]), int(offsets[v + 1])
        deg = hi - lo
        if deg <= fanout:
            for j in range(deg):
                out.append((i, int(targets[lo + j])))
        else:
            state = mix64_int(base ^ ((v * PHI) & MASK))
            idx = list(range(deg))
            for j in range(fanout):
                state = (state + GOLDEN) & MASK
                r = mix64_int(state)
                pick = j + (r % (deg - j))
                idx[j], idx[pick] = idx[pick], idx[j]
                out.append((i, int(targets[lo + idx[j]])))
    return out


def dense_gcn_layer(block, h_in, w, activation=True):
    """Triple-loop dense A_hat @ H @ W with block-local degrees."""
    n_dst, n_src = block.n_dst, block.n_src
    indeg = [0] * n_dst
    outdeg = [0] * n_src
    for e in range(block.n_edges):
        indeg[block.edge_dst[e]] += 1
        outdeg[block.edge_src[e]] += 1
    a_hat = np.zeros((n_dst, n_src))
    for e in range(block.n_edges):
        s, d = int(block.edge_src[e]), int(block.edge_dst[e])
        a_hat[d, s] = 1.0 / np.sqrt(outdeg[s] * indeg[d])
    agg = np.zeros((n_dst, h_in.shape[1]))
    for d in range(n_dst):
        for s in range(n_src):
            if a_hat[d, s]:
                for c in range(h_in.shape[1]):
                    agg[d, c] += a_hat[d, s] * h_in[s, c]
    z = np.zeros((n_dst, w.shape[1]))
    for d in range(n_dst):
        for o in range(w.shape[1]):
            acc = 0.0
            for c in range(w.shape[0]):
                acc += agg[d, c] * w[c, o]
            z[d, o] = acc
    return np.maximum(z, 0.0) if activation else z


def dense_sage_layer(block, h_in, w_self, w_neigh, activation=True):
    """Straight-loop mean-aggregator layer excluding self edges."""
    n_dst = block.n_dst
    sums = np.zeros((n_dst, h_in.shape[1]))
    counts = [0] * n_dst
    for e in range(block.n_edges):
        s, d = int(block.edge_src[e]), int(block.edge_dst[e])
        if int(block.src_vertices[s]) == int(block.dst_vertices[d]):
            continue
        counts[d] += 1
    for e in range(block.n_edges):
        s, d = int(block.edge_src[e]), int(block.edge_dst[e])
        if int(block.src_vertices[s]) == int(block.dst_vertices[d]):
            continue
        for c in range(h_in.shape[1]):
            sums[d, c] += h_in[s, c] / counts[d]
    z = h_in[:n_dst] @ w_self + sums @ w_neigh
    return np.maximum(z, 0.0) if activation else z


def fd_dlogits(logits, labels, eps=1e-6):
    """Central finite differences of the mean cross-entropy w.r.t. logits."""

    def loss_of(lg):
        shifted = lg - lg.max(axis=1, keepdims=True)
        p = np.exp(shifted)
        p /= p.sum(axis=1, keepdims=True)
        n = lg.shape[0]
        return float(-np.log(p[np.arange(n), labels]).mean())

    grad = np.zeros_like(logits)
    for i in range(logits.shape[0]):
        for j in range(logits.shape[1]):
            up = logits.copy()
            up[i, j] += eps
            down = logits.copy()
            down[i, j] -= eps
            grad[i, j] = (loss_of(up) - loss_of(down)) / (2 * eps)
    return grad


def brute_force_bottom_counts(graph, batches_per_round, fanouts, sampler_fn):
    """Count bottom-frontier occurrences by replaying the given sampler."""
    counts = {}
    for seeds, rng_seed in batches_per_round:
        stack = sampler_fn(graph, seeds, fanouts, rng_seed)
        for v in stack.blocks[0].src_vertices:
            counts[int(v)] = counts.get(int(v), 0) + 1
    return counts
