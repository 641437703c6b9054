"""CSR graph storage, dataset loading, and synthetic graph generation.

Graphs are stored with incoming-neighbor orientation: row ``v`` of the CSR
holds the sources of edges pointing at ``v``. Training-oriented loaders
symmetrize undirected inputs and add self-loops; the raw edge-list loader
keeps the file's edges as written unless asked otherwise.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import derive_seed

_CACHE_MAGIC = b"HGNNBIN1"
_CACHE_VERSION = 1

TRAIN_FRACTION = 0.65
TEST_FRACTION = 0.10
VAL_FRACTION = 0.25


class GraphFormatError(ValueError):
    """Malformed dataset input (parse errors carry the offending line)."""


@dataclass(frozen=True)
class Graph:
    """Immutable CSR adjacency over incoming neighbors."""

    offsets: np.ndarray  # int64, shape [num_vertices + 1]
    targets: np.ndarray  # int64, shape [num_edges]; row v lists N_in(v)

    def __post_init__(self):
        self.offsets.setflags(write=False)
        self.targets.setflags(write=False)
        self.validate()

    @property
    def num_vertices(self) -> int:
        return self.offsets.shape[0] - 1

    @property
    def num_edges(self) -> int:
        return self.targets.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.offsets[1:] - self.offsets[:-1]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def validate(self) -> None:
        if self.offsets.dtype != np.int64 or self.targets.dtype != np.int64:
            raise GraphFormatError("CSR arrays must be int64")
        if self.offsets.shape[0] < 2:
            raise GraphFormatError("empty graph rejected: no vertices")
        if self.offsets[0] != 0 or self.offsets[-1] != self.targets.shape[0]:
            raise GraphFormatError("CSR offsets do not bracket the edge array")
        if np.any(np.diff(self.offsets) < 0):
            raise GraphFormatError("CSR offsets must be non-decreasing")
        if self.targets.size and (
            self.targets.min() < 0 or self.targets.max() >= self.num_vertices
        ):
            raise GraphFormatError("edge target vertex id out of range")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.offsets.tobytes())
        h.update(self.targets.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class VertexData:
    """Per-vertex features, labels and train/val/test masks."""

    features: np.ndarray  # float64 [V, feat_dim]
    labels: np.ndarray  # int64 [V]
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    def __post_init__(self):
        for arr in (self.features, self.labels, self.train_mask,
                    self.val_mask, self.test_mask):
            arr.setflags(write=False)
        self.validate()

    @property
    def feat_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def validate(self) -> None:
        if self.features.ndim != 2 or self.features.shape[1] <= 0:
            raise GraphFormatError("features must be [V, feat_dim] with feat_dim > 0")
        if not np.all(np.isfinite(self.features)):
            raise GraphFormatError("non-finite feature values")
        overlap = (
            (self.train_mask & self.val_mask)
            | (self.train_mask & self.test_mask)
            | (self.val_mask & self.test_mask)
        )
        if overlap.any():
            raise GraphFormatError("train/val/test masks overlap")
        if (self.labels[self.train_mask] < 0).any():
            raise GraphFormatError("train vertex with invalid label")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for arr in (self.features, self.labels, self.train_mask,
                    self.val_mask, self.test_mask):
            h.update(arr.tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# CSR construction helpers
# ---------------------------------------------------------------------------

def build_csr(
    src: np.ndarray,
    dst: np.ndarray,
    num_vertices: int,
    *,
    symmetrize: bool = False,
    add_self_loops: bool = False,
) -> Graph:
    """Build incoming-neighbor CSR from edge endpoint arrays.

    Rows are sorted by source id and exact duplicate edges are collapsed, so
    the result is byte-deterministic for a given edge multiset.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if symmetrize:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    if add_self_loops:
        loops = np.arange(num_vertices, dtype=np.int64)
        src = np.concatenate([src, loops])
        dst = np.concatenate([dst, loops])
    keys = dst * np.int64(num_vertices) + src
    keys = np.unique(keys)
    dst = keys // num_vertices
    src = keys % num_vertices
    offsets = np.zeros(num_vertices + 1, dtype=np.int64)
    np.add.at(offsets, dst + 1, 1)
    np.cumsum(offsets, out=offsets)
    return Graph(offsets=offsets, targets=src)


def _random_vertex_data(
    num_vertices: int,
    feat_dim: int,
    num_classes: int,
    seed: int,
    labels: np.ndarray | None = None,
    features: np.ndarray | None = None,
) -> VertexData:
    if features is None:
        gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 101)))
        features = gen.standard_normal((num_vertices, feat_dim))
    if labels is None:
        gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 102)))
        labels = gen.integers(0, num_classes, size=num_vertices).astype(np.int64)
    train, val, test = split_masks(num_vertices, seed)
    return VertexData(features=features, labels=labels,
                      train_mask=train, val_mask=val, test_mask=test)


def split_masks(num_vertices: int, seed: int):
    """65/10/25 train/test/val split, shuffled deterministically by seed."""
    gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 103)))
    order = gen.permutation(num_vertices)
    n_train = int(num_vertices * TRAIN_FRACTION)
    n_test = int(num_vertices * TEST_FRACTION)
    train = np.zeros(num_vertices, dtype=bool)
    val = np.zeros(num_vertices, dtype=bool)
    test = np.zeros(num_vertices, dtype=bool)
    train[order[:n_train]] = True
    test[order[n_train:n_train + n_test]] = True
    val[order[n_train + n_test:]] = True
    return train, val, test


# ---------------------------------------------------------------------------
# edge-list loading
# ---------------------------------------------------------------------------

def load_edge_list(
    path: str | Path,
    feat_dim: int,
    seed: int,
    *,
    num_classes: int = 4,
    symmetrize: bool = False,
    add_self_loops: bool = False,
) -> tuple[Graph, VertexData]:
    """Load a whitespace "src dst" edge list and its optional sidecars.

    Sidecars ``<stem>.feat`` (rows of reals) and ``<stem>.labels`` (one class
    id per line) are picked up when present; otherwise features and labels
    are generated pseudo-randomly from ``seed``. Masks always come from the
    65/10/25 split. Training pipelines should pass ``symmetrize=True,
    add_self_loops=True``; the raw default keeps the file's edges verbatim.
    """
    path = Path(path)
    srcs: list[int] = []
    dsts: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'src dst', got {stripped!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: non-integer vertex id in {stripped!r}"
                ) from None
            if u < 0 or v < 0:
                raise GraphFormatError(
                    f"{path}:{lineno}: negative vertex id in {stripped!r}"
                )
            srcs.append(u)
            dsts.append(v)
    if not srcs:
        raise GraphFormatError(f"{path}: empty graph rejected")
    src = np.asarray(srcs, dtype=np.int64)
    dst = np.asarray(dsts, dtype=np.int64)
    num_vertices = int(max(src.max(), dst.max())) + 1
    graph = build_csr(src, dst, num_vertices,
                      symmetrize=symmetrize, add_self_loops=add_self_loops)

    features = labels = None
    feat_path = path.with_suffix(".feat")
    if feat_path.exists():
        features = np.loadtxt(feat_path, dtype=np.float64, ndmin=2)
        if features.shape != (num_vertices, feat_dim):
            raise GraphFormatError(
                f"{feat_path}: expected shape {(num_vertices, feat_dim)}, "
                f"got {features.shape}"
            )
    label_path = path.with_suffix(".labels")
    if label_path.exists():
        labels = np.loadtxt(label_path, dtype=np.int64, ndmin=1)
        if labels.shape != (num_vertices,):
            raise GraphFormatError(
                f"{label_path}: expected {num_vertices} labels, got {labels.shape}"
            )
    data = _random_vertex_data(num_vertices, feat_dim, num_classes, seed,
                               labels=labels, features=features)
    return graph, data


def write_edge_list(path: str | Path, graph: Graph, data: VertexData | None = None) -> None:
    """Write the CSR back out as "src dst" lines plus optional sidecars.

    Feature reals use %.17g so a reload reproduces them exactly.
    """
    path = Path(path)
    with open(path, "w", encoding="ascii") as fh:
        for v in range(graph.num_vertices):
            for u in graph.in_neighbors(v):
                fh.write(f"{u} {v}\n")
    if data is not None:
        np.savetxt(path.with_suffix(".feat"), data.features, fmt="%.17g")
        np.savetxt(path.with_suffix(".labels"), data.labels, fmt="%d")


# ---------------------------------------------------------------------------
# synthetic graphs
# ---------------------------------------------------------------------------

def synthetic_graph(
    kind: str,
    num_vertices: int,
    params: dict,
    feat_dim: int,
    num_classes: int,
    seed: int,
) -> tuple[Graph, VertexData]:
    """Generate a deterministic synthetic dataset.

    ``kind="sbm"``: ``params`` takes ``blocks`` (default ``num_classes``),
    ``p_in``, ``p_out``; labels equal block ids and features carry a noisy
    per-block mean so the task is learnable.

    ``kind="power-law"``: Chung-Lu style with ``exponent`` and ``avg_degree``;
    low vertex ids are hubs, labels and features are random.

    Both kinds symmetrize and include self-loops (training-ready graphs).
    """
    if num_vertices < 2:
        raise GraphFormatError("synthetic graphs need at least 2 vertices")
    if kind == "sbm":
        return _sbm(num_vertices, params, feat_dim, num_classes, seed)
    if kind in ("power-law", "powerlaw"):
        return _power_law(num_vertices, params, feat_dim, num_classes, seed)
    raise GraphFormatError(f"unknown synthetic graph kind {kind!r}")


def _sbm(num_vertices, params, feat_dim, num_classes, seed):
    blocks = int(params.get("blocks", num_classes))
    p_in = float(params.get("p_in", 0.05))
    p_out = float(params.get("p_out", 0.005))
    if blocks < 1 or blocks > num_vertices:
        raise GraphFormatError(f"invalid SBM block count {blocks}")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise GraphFormatError(
            f"SBM needs 0 <= p_out <= p_in <= 1, got p_in={p_in} p_out={p_out}"
        )
    block_of = (np.arange(num_vertices, dtype=np.int64) * blocks) // num_vertices
    gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 1)))
    prob = np.where(block_of[:, None] == block_of[None, :], p_in, p_out)
    draw = gen.random((num_vertices, num_vertices))
    adj = np.triu(draw < prob, k=1)
    src, dst = np.nonzero(adj)
    graph = build_csr(src, dst, num_vertices, symmetrize=True, add_self_loops=True)

    label_of = block_of % num_classes
    fgen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 2)))
    means = fgen.standard_normal((blocks, feat_dim)) * 2.0
    noise = fgen.standard_normal((num_vertices, feat_dim))
    features = means[block_of] + noise
    train, val, test = split_masks(num_vertices, seed)
    data = VertexData(features=features, labels=label_of,
                      train_mask=train, val_mask=val, test_mask=test)
    return graph, data


def _power_law(num_vertices, params, feat_dim, num_classes, seed):
    exponent = float(params.get("exponent", 2.5))
    avg_degree = float(params.get("avg_degree", 8.0))
    if exponent <= 1.0:
        raise GraphFormatError(f"power-law exponent must exceed 1, got {exponent}")
    if avg_degree <= 0:
        raise GraphFormatError(f"avg_degree must be positive, got {avg_degree}")
    gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 3)))
    # zipf-drawn expected degrees (capped), rescaled to the target average,
    # then a Chung-Lu edge draw; heavy head so hotness skew is realistic
    weights = gen.zipf(exponent, size=num_vertices).astype(np.float64)
    weights = np.minimum(weights, num_vertices / 4)
    weights = np.sort(weights)[::-1]
    weights *= (avg_degree * num_vertices) / weights.sum()
    scale = 1.0 / weights.sum()
    prob = np.minimum(1.0, weights[:, None] * weights[None, :] * scale)
    draw = gen.random((num_vertices, num_vertices))
    adj = np.triu(draw < prob, k=1)
    src, dst = np.nonzero(adj)
    graph = build_csr(src, dst, num_vertices, symmetrize=True, add_self_loops=True)
    data = _random_vertex_data(num_vertices, feat_dim, num_classes, seed)
    return graph, data


# ---------------------------------------------------------------------------
# versioned binary cache
# ---------------------------------------------------------------------------

def save_binary(path: str | Path, graph: Graph, data: VertexData) -> None:
    """Write the dataset to the engine's versioned binary cache format."""
    arrays = [graph.offsets, graph.targets, data.features, data.labels,
              data.train_mask, data.val_mask, data.test_mask]
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(struct.pack("<I", len(arrays)))
        for arr in arrays:
            dtype = arr.dtype.str.encode("ascii")
            fh.write(struct.pack("<I", len(dtype)))
            fh.write(dtype)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}q", *arr.shape))
            fh.write(np.ascontiguousarray(arr).tobytes())


def load_binary(path: str | Path) -> tuple[Graph, VertexData]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise GraphFormatError(f"{path}: not a hetgnn binary cache (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _CACHE_VERSION:
            raise GraphFormatError(
                f"{path}: unsupported cache version {version} "
                f"(expected {_CACHE_VERSION})"
            )
        (count,) = struct.unpack("<I", fh.read(4))
        arrays = []
        for _ in range(count):
            (dlen,) = struct.unpack("<I", fh.read(4))
            dtype = np.dtype(fh.read(dlen).decode("ascii"))
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = struct.unpack(f"<{ndim}q", fh.read(8 * ndim))
            n_items = int(np.prod(shape)) if ndim else 1
            buf = fh.read(n_items * dtype.itemsize)
            arrays.append(np.frombuffer(buf, dtype=dtype).reshape(shape).copy())
    offsets, targets, features, labels, train, val, test = arrays
    graph = Graph(offsets=offsets, targets=targets)
    data = VertexData(features=features, labels=labels,
                      train_mask=train.astype(bool), val_mask=val.astype(bool),
                      test_mask=test.astype(bool))
    return graph, data
