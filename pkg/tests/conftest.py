import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hetgnn.graph import build_csr, synthetic_graph
from hetgnn.workloads import powerlaw_fixture, sbm_fixture


@pytest.fixture(scope="session")
def sbm1k():
    return sbm_fixture()


@pytest.fixture(scope="session")
def powerlaw1k():
    return powerlaw_fixture()


@pytest.fixture(scope="session")
def dense_sbm40():
    """Small but well-connected graph for layer math and gradient tests."""
    return synthetic_graph("sbm", 40, {"blocks": 4, "p_in": 0.5, "p_out": 0.15},
                           feat_dim=4, num_classes=4, seed=11)


@pytest.fixture()
def star_graph():
    """Undirected star, center 0, leaves 1..5, self-loops included."""
    leaves = np.arange(1, 6, dtype=np.int64)
    src = np.zeros(5, dtype=np.int64)
    return build_csr(src, leaves, 6, symmetrize=True, add_self_loops=True)
