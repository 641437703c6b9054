"""Sample-based mini-batch GNN training for a modeled two-device environment."""

__version__ = "0.1.0"

from .graph import Graph, VertexData, load_edge_list, synthetic_graph  # noqa: F401
from .sampler import (  # noqa: F401
    Block,
    Fanouts,
    SampledBlockStack,
    sample_khop,
    sample_khop_skip_hot,
    sample_one_hop_hot,
)
from .gnnmath import ModelParams, init_params, loss_and_grad, sgd_step  # noqa: F401
from .hotness import (  # noqa: F401
    HotnessTable,
    HotSetPartition,
    estimate_hotness,
    partition_hot,
    select_hot,
)
from .store import EmbeddingStore, StalenessViolation, StoreContractError  # noqa: F401
from .devsim import DeviceModel, LinkModel, SimulatedOOM, contention_model, simulate  # noqa: F401
from .orchestrator import ConfigError, EpochReport, TrainConfig, run_training  # noqa: F401
