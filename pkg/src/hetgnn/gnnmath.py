"""Dense tensor math for GCN and mean-aggregator SAGE layers over blocks.

All aggregation runs through the segment kernels with edges in (dst, src)
order, so forward and backward are deterministic bit-for-bit for fixed
inputs. Historical-embedding rows injected into the bottom layer's output
are constants: their gradient contribution is masked to zero before the
bottom layer's backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import derive_seed, segment_weighted_rows
from .sampler import Block, SampledBlockStack


class ShapeError(ValueError):
    pass


@dataclass
class ModelParams:
    """Per-layer weights plus the batch-counter version.

    GCN layers hold one matrix ``[W]``; SAGE layers hold ``[W_self, W_neigh]``.
    """

    model: str
    dims: list[int]  # [feat_dim, hidden..., num_classes]
    weights: list[list[np.ndarray]]
    version: int = 0

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "ModelParams":
        return ModelParams(
            model=self.model,
            dims=list(self.dims),
            weights=[[w.copy() for w in layer] for layer in self.weights],
            version=self.version,
        )

    def bottom_weights(self) -> list[np.ndarray]:
        return [w.copy() for w in self.weights[0]]

    def num_elements(self) -> int:
        return sum(w.size for layer in self.weights for w in layer)


def init_params(model: str, dims: list[int], seed: int) -> ModelParams:
    """Glorot-uniform initialization, deterministic per seed."""
    if model not in ("gcn", "sage"):
        raise ShapeError(f"unknown model {model!r}")
    weights = []
    for l in range(len(dims) - 1):
        fan_in, fan_out = dims[l], dims[l + 1]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        n_mats = 1 if model == "gcn" else 2
        layer = []
        for m in range(n_mats):
            gen = np.random.Generator(
                np.random.Philox(key=derive_seed(seed, 7, l, m))
            )
            layer.append(gen.uniform(-limit, limit, size=(fan_in, fan_out)))
        weights.append(layer)
    return ModelParams(model=model, dims=list(dims), weights=weights)


@dataclass
class LayerActivations:
    """Everything the backward pass needs for one layer."""

    block: Block
    h_in: np.ndarray
    agg: np.ndarray  # GCN: normalized aggregate; SAGE: neighbor mean
    z: np.ndarray
    activation: bool
    norm_weights: np.ndarray = None
    neigh_weights: np.ndarray = None  # SAGE: per-edge 1/count for non-self edges
    neigh_edges: tuple[np.ndarray, np.ndarray] = None
    injected_rows: np.ndarray = None  # bool over output rows (constants)


def gcn_norm_weights(block: Block) -> np.ndarray:
    """Symmetric normalization within the sampled block.

    Edge (u -> v) weighs 1/sqrt(d_out(u) * d_in(v)) with degrees counted over
    the block's own edges.
    """
    indeg = np.bincount(block.edge_dst, minlength=block.n_dst).astype(np.float64)
    outdeg = np.bincount(block.edge_src, minlength=block.n_src).astype(np.float64)
    return 1.0 / np.sqrt(outdeg[block.edge_src] * indeg[block.edge_dst])


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite values in {name}")


def gcn_layer_forward(block: Block, h_in: np.ndarray, w: np.ndarray,
                      activation: bool = True):
    """Aggregate with symmetric normalization, then Z = Agg @ W.

    ReLU on hidden layers (``activation=True``), identity on the output layer.
    """
    if h_in.shape[0] != block.n_src:
        raise ShapeError(
            f"gcn layer: input rows {h_in.shape[0]} != block src count {block.n_src}"
        )
    if w.shape[0] != h_in.shape[1]:
        raise ShapeError(
            f"gcn layer: weight input dim {w.shape[0]} != feature dim {h_in.shape[1]}"
        )
    nw = gcn_norm_weights(block)
    agg = segment_weighted_rows(block.edge_src, block.edge_dst, nw, h_in, block.n_dst)
    z = agg @ w
    h_out = np.maximum(z, 0.0) if activation else z
    _check_finite("gcn layer output", h_out)
    cache = LayerActivations(block=block, h_in=h_in, agg=agg, z=z,
                             activation=activation, norm_weights=nw)
    return h_out, cache


def gcn_layer_backward(cache: LayerActivations, d_out: np.ndarray,
                       w: np.ndarray, need_dx: bool = True):
    dz = d_out * (cache.z > 0.0) if cache.activation else d_out
    if cache.injected_rows is not None and cache.injected_rows.any():
        dz = dz.copy()
        dz[cache.injected_rows] = 0.0
    dw = cache.agg.T @ dz
    dx = None
    if need_dx:
        block = cache.block
        dagg = dz @ w.T
        dx = segment_weighted_rows(block.edge_dst, block.edge_src,
                                   cache.norm_weights, dagg, block.n_src)
    return [dw], dx


def _sage_neighbor_edges(block: Block):
    src_g = block.edge_src_global()
    dst_g = block.edge_dst_global()
    keep = src_g != dst_g
    es, ed = block.edge_src[keep], block.edge_dst[keep]
    counts = np.bincount(ed, minlength=block.n_dst).astype(np.float64)
    weights = np.zeros(es.shape[0], dtype=np.float64)
    nz = counts[ed] > 0
    weights[nz] = 1.0 / counts[ed][nz]
    return es, ed, weights


def sage_layer_forward(block: Block, h_in: np.ndarray, w_self: np.ndarray,
                       w_neigh: np.ndarray, activation: bool = True):
    """Mean over sampled non-self neighbors, two-weight update.

    H_out = act(H_self @ W_self + Mean_neigh @ W_neigh); a destination with
    zero sampled neighbors contributes a zero neighbor term.
    """
    if h_in.shape[0] != block.n_src:
        raise ShapeError(
            f"sage layer: input rows {h_in.shape[0]} != block src count {block.n_src}"
        )
    if w_self.shape[0] != h_in.shape[1] or w_neigh.shape[0] != h_in.shape[1]:
        raise ShapeError("sage layer: weight input dim mismatch")
    es, ed, weights = _sage_neighbor_edges(block)
    mean = segment_weighted_rows(es, ed, weights, h_in, block.n_dst)
    h_self = h_in[:block.n_dst]
    z = h_self @ w_self + mean @ w_neigh
    h_out = np.maximum(z, 0.0) if activation else z
    _check_finite("sage layer output", h_out)
    cache = LayerActivations(block=block, h_in=h_in, agg=mean, z=z,
                             activation=activation,
                             neigh_weights=weights, neigh_edges=(es, ed))
    return h_out, cache


def sage_layer_backward(cache: LayerActivations, d_out: np.ndarray,
                        w_self: np.ndarray, w_neigh: np.ndarray,
                        need_dx: bool = True):
    dz = d_out * (cache.z > 0.0) if cache.activation else d_out
    if cache.injected_rows is not None and cache.injected_rows.any():
        dz = dz.copy()
        dz[cache.injected_rows] = 0.0
    h_self = cache.h_in[:cache.block.n_dst]
    dw_self = h_self.T @ dz
    dw_neigh = cache.agg.T @ dz
    dx = None
    if need_dx:
        block = cache.block
        dx = np.zeros((block.n_src, w_self.shape[0]), dtype=np.float64)
        dx[:block.n_dst] += dz @ w_self.T
        es, ed = cache.neigh_edges
        dmean = dz @ w_neigh.T
        dx += segment_weighted_rows(ed, es, cache.neigh_weights, dmean, block.n_src)
    return [dw_self, dw_neigh], dx


def layer_forward(model: str, block: Block, h_in: np.ndarray,
                  layer_weights: list[np.ndarray], activation: bool):
    if model == "gcn":
        return gcn_layer_forward(block, h_in, layer_weights[0], activation)
    return sage_layer_forward(block, h_in, layer_weights[0], layer_weights[1],
                              activation)


def layer_backward(model: str, cache: LayerActivations, d_out: np.ndarray,
                   layer_weights: list[np.ndarray], need_dx: bool):
    if model == "gcn":
        return gcn_layer_backward(cache, d_out, layer_weights[0], need_dx)
    return sage_layer_backward(cache, d_out, layer_weights[0],
                               layer_weights[1], need_dx)


def forward_batch(stack: SampledBlockStack, inputs: np.ndarray,
                  params: ModelParams, model: str | None = None,
                  inject: tuple[np.ndarray, np.ndarray] | None = None):
    """Run the stack bottom-up; returns (logits, caches).

    ``inject`` optionally supplies ``(row_indices, values)`` overwriting rows
    of the bottom layer's output with constant historical embeddings before
    the upper layers run. Injected rows are excluded from the bottom layer's
    weight gradients.
    """
    model = model or params.model
    num_layers = len(stack.blocks)
    if params.num_layers != num_layers:
        raise ShapeError(
            f"stack has {num_layers} blocks but params {params.num_layers} layers"
        )
    caches: list[LayerActivations] = []
    h = inputs
    for l, block in enumerate(stack.blocks):
        activation = l < num_layers - 1
        h, cache = layer_forward(model, block, h, params.weights[l], activation)
        if l == 0 and inject is not None and inject[0].size:
            idx, values = inject
            h[idx] = values
            mask = np.zeros(h.shape[0], dtype=bool)
            mask[idx] = True
            cache.injected_rows = mask
        caches.append(cache)
    return h, caches


def backward_batch(caches: list[LayerActivations], dlogits: np.ndarray,
                   params: ModelParams):
    """Exact reverse-mode gradients for every layer's weights."""
    grads: list[list[np.ndarray]] = [None] * len(caches)
    d = dlogits
    for l in range(len(caches) - 1, -1, -1):
        need_dx = l > 0
        layer_grads, d = layer_backward(params.model, caches[l], d,
                                        params.weights[l], need_dx)
        grads[l] = layer_grads
    return grads


def loss_and_grad(logits: np.ndarray, labels: np.ndarray):
    """Softmax cross-entropy averaged over the batch; returns (loss, dlogits)."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits


def sgd_step(params: ModelParams, grads, lr: float) -> ModelParams:
    """In-place SGD update; bumps the parameter version by exactly one."""
    for layer_w, layer_g in zip(params.weights, grads):
        for w, g in zip(layer_w, layer_g):
            w -= lr * g
    params.version += 1
    return params


@dataclass
class AdamState:
    m: list[list[np.ndarray]] = field(default_factory=list)
    v: list[list[np.ndarray]] = field(default_factory=list)
    t: int = 0


def adam_step(params: ModelParams, grads, lr: float, state: AdamState,
              beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> ModelParams:
    if not state.m:
        state.m = [[np.zeros_like(w) for w in layer] for layer in params.weights]
        state.v = [[np.zeros_like(w) for w in layer] for layer in params.weights]
    state.t += 1
    for li, (layer_w, layer_g) in enumerate(zip(params.weights, grads)):
        for wi, (w, g) in enumerate(zip(layer_w, layer_g)):
            m = state.m[li][wi]
            v = state.v[li][wi]
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * g * g
            mhat = m / (1 - beta1 ** state.t)
            vhat = v / (1 - beta2 ** state.t)
            w -= lr * mhat / (np.sqrt(vhat) + eps)
    params.version += 1
    return params


def grad_check(stack: SampledBlockStack, inputs: np.ndarray,
               labels: np.ndarray, params: ModelParams,
               epsilon: float = 1e-5,
               inject: tuple[np.ndarray, np.ndarray] | None = None) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    Intended for small instances (about 1e3 parameters or fewer).
    """
    logits, caches = forward_batch(stack, inputs, params, inject=inject)
    _, dlogits = loss_and_grad(logits, labels)
    analytic = backward_batch(caches, dlogits, params)

    def loss_of(p: ModelParams) -> float:
        lg, _ = forward_batch(stack, inputs, p, inject=inject)
        val, _ = loss_and_grad(lg, labels)
        return val

    max_rel = 0.0
    for li, layer in enumerate(params.weights):
        for wi, w in enumerate(layer):
            flat = w.reshape(-1)
            g_flat = analytic[li][wi].reshape(-1)
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + epsilon
                up = loss_of(params)
                flat[k] = orig - epsilon
                down = loss_of(params)
                flat[k] = orig
                fd = (up - down) / (2 * epsilon)
                denom = max(abs(fd), abs(g_flat[k]), 1e-8)
                max_rel = max(max_rel, abs(fd - g_flat[k]) / denom)
    return max_rel
