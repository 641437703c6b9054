"""Hot numeric kernels: seeded sampling and segment aggregation.

Every kernel here exists in two flavors selected at import time:

* a numba ``@njit`` build (default when numba is importable), and
* a pure numpy/Python fallback, forced with ``HETGNN_NUMBA=0``.

Both flavors are bit-identical by construction: the RNG is a splitmix64
counter generator on ``np.uint64`` scalars (wrapping arithmetic behaves the
same compiled or not), and all floating accumulations run in a fixed edge
order, so ``np.add.at`` in the fallback reproduces the compiled loop exactly.
"""

from __future__ import annotations

import os

import numpy as np

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_PHI = U64(0x2545F4914F6CDD1D)


def _numba_wanted() -> bool:
    flag = os.environ.get("HETGNN_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


_HAS_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit as _njit

        _HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAS_NUMBA = False


def backend_name() -> str:
    """Return which kernel flavor is active: "numba" or "numpy"."""
    return "numba" if _HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# splitmix64 streams
# ---------------------------------------------------------------------------

def _mix64(x):
    x = (x ^ (x >> U64(30))) * _MIX1
    x = (x ^ (x >> U64(27))) * _MIX2
    return x ^ (x >> U64(31))


if _HAS_NUMBA:
    _mix64 = _njit(cache=True)(_mix64)


def derive_seed(seed: int, *parts: int) -> int:
    """Derive an independent 64-bit stream seed from a base seed and indices.

    Chained splitmix64 finalizers; stable across platforms and backends.
    """
    with np.errstate(over="ignore"):
        state = _mix64(U64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        for p in parts:
            state = _mix64((state + _GOLDEN) ^ U64(p & 0xFFFFFFFFFFFFFFFF))
    return int(state)


# ---------------------------------------------------------------------------
# neighbor sampling
# ---------------------------------------------------------------------------

def _sample_layer(offsets, targets, dst_globals, fanout, base_state):
    # Per destination: all neighbors when degree <= fanout, otherwise a
    # uniform without-replacement draw via partial Fisher-Yates on a
    # per-(base_state, vertex) splitmix64 stream. The stream depends only on
    # the destination's global id, never on batch composition or schedule.
    n_dst = dst_globals.shape[0]
    counts = np.empty(n_dst, np.int64)
    for i in range(n_dst):
        v = dst_globals[i]
        deg = offsets[v + 1] - offsets[v]
        counts[i] = deg if deg < fanout else fanout
    starts = np.empty(n_dst + 1, np.int64)
    starts[0] = 0
    for i in range(n_dst):
        starts[i + 1] = starts[i] + counts[i]
    total = starts[n_dst]
    edge_dst = np.empty(total, np.int64)
    edge_src = np.empty(total, np.int64)
    for i in range(n_dst):
        v = dst_globals[i]
        off = offsets[v]
        deg = offsets[v + 1] - off
        pos = starts[i]
        if deg <= fanout:
            for j in range(deg):
                edge_dst[pos + j] = i
                edge_src[pos + j] = targets[off + j]
        else:
            state = _mix64(base_state ^ (U64(v) * _PHI))
            idx = np.empty(deg, np.int64)
            for j in range(deg):
                idx[j] = j
            for j in range(fanout):
                state = state + _GOLDEN
                r = _mix64(state)
                pick = j + int(r % U64(deg - j))
                tmp = idx[j]
                idx[j] = idx[pick]
                idx[pick] = tmp
                edge_dst[pos + j] = i
                edge_src[pos + j] = targets[off + idx[j]]
    return edge_dst, edge_src


def _segment_weighted_rows_loop(edge_src, edge_dst, weights, rows, n_out):
    out = np.zeros((n_out, rows.shape[1]), rows.dtype)
    for e in range(edge_src.shape[0]):
        s = edge_src[e]
        d = edge_dst[e]
        w = weights[e]
        for c in range(rows.shape[1]):
            out[d, c] += w * rows[s, c]
    return out


def _segment_weighted_rows_addat(edge_src, edge_dst, weights, rows, n_out):
    out = np.zeros((n_out, rows.shape[1]), rows.dtype)
    if edge_src.shape[0]:
        np.add.at(out, edge_dst, weights[:, None] * rows[edge_src])
    return out


if _HAS_NUMBA:
    _sample_layer_impl = _njit(cache=True)(_sample_layer)
    segment_weighted_rows = _njit(cache=True)(_segment_weighted_rows_loop)
else:
    _sample_layer_impl = _sample_layer
    segment_weighted_rows = _segment_weighted_rows_addat


def sample_layer(offsets, targets, dst_globals, fanout, stream_seed):
    """Sample up to ``fanout`` in-neighbors per destination vertex.

    Returns ``(edge_dst_local, edge_src_global)`` in emission order
    (destinations in input order, draws in stream order).
    """
    with np.errstate(over="ignore"):
        # the compiled _mix64 unboxes to a Python int; re-cast for the kernel
        base = U64(int(_mix64(U64(stream_seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)))
        return _sample_layer_impl(
            offsets, targets, dst_globals, np.int64(fanout), base
        )


def count_into(counter: np.ndarray, ids: np.ndarray) -> None:
    """counter[v] += 1 for every v in ids (duplicates accumulate)."""
    np.add.at(counter, ids, 1)


def stable_unique(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicate keeping first-occurrence order.

    Returns ``(unique_values, inverse)`` with ``unique_values[inverse]``
    reproducing ``values``.
    """
    uniq_sorted, first_idx, inv_sorted = np.unique(
        values, return_index=True, return_inverse=True
    )
    order = np.argsort(first_idx, kind="stable")
    uniq = values[np.sort(first_idx)]
    # position of each sorted-unique value in the first-occurrence ordering
    rank_of_sorted = np.empty_like(order)
    rank_of_sorted[order] = np.arange(order.shape[0])
    return uniq, rank_of_sorted[inv_sorted]
