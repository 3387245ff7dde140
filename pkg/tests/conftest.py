import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from frontrank.data import FeatureDataset, RetrievalConfig
from frontrank.emr import build_emr_model
from frontrank.metrics import make_bridge_benchmark


def random_dataset(n: int, m: int, seed: int = 0, prefix: str = "it") -> FeatureDataset:
    rng = np.random.default_rng(seed)
    return FeatureDataset(
        item_ids=tuple(f"{prefix}{i:04d}" for i in range(n)),
        features=rng.normal(size=(n, m)),
    )


@pytest.fixture(scope="session")
def blob_dataset() -> FeatureDataset:
    return random_dataset(100, 5, seed=7)


@pytest.fixture(scope="session")
def blob_model(blob_dataset):
    cfg = RetrievalConfig(alpha=0.9, anchor_count=10, nearest_anchors=3)
    return build_emr_model(blob_dataset, cfg, rng_seed=0)


@pytest.fixture(scope="session")
def bridge_benchmark():
    return make_bridge_benchmark(seed=0)


@pytest.fixture(scope="session")
def bridge_model(bridge_benchmark):
    ds, _ = bridge_benchmark
    cfg = RetrievalConfig(alpha=0.99, anchor_count=32, nearest_anchors=3)
    return build_emr_model(ds, cfg, rng_seed=0)
