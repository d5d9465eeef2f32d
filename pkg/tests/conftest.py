import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from Functions.Config import build_config  # noqa: E402
from Functions.DataIO import SyntheticConfig, generate_synthetic_dataset, prepare_dataset  # noqa: E402
from Functions.Encoders import get_backend  # noqa: E402

# corrida mínima: 32×32 px, patches de 16 (4 tokens por frame), modelos chicos
TINY = {
    "SYNTH_N_TRAIN": "24",
    "SYNTH_N_TEST": "6",
    "SYNTH_N_VOXELS": "32",
    "SYNTH_HEIGHT": "32",
    "SYNTH_WIDTH": "32",
    "SYNTH_N_SIGNAL_VOXELS": "8",
    "VOXEL_K": "24",
    "SEMANTIC_HIDDEN": "32",
    "HEAD_HIDDEN": "16",
    "SEMANTIC_EPOCHS": "2",
    "SEMANTIC_BATCH": "8",
    "SEMANTIC_LR": "1e-3",
    "STRUCTURE_HIDDEN": "32",
    "STRUCTURE_EPOCHS": "2",
    "STRUCTURE_BATCH": "8",
    "STRUCTURE_LR": "1e-3",
    "STRUCTURE_WARMUP": "1",
    "CMG_LAYERS": "1",
    "CMG_D_TOKEN": "16",
    "CMG_HEADS": "2",
    "CMG_PATCH": "16",
    "CMG_FMRI_TOKENS": "2",
    "CMG_EPOCHS": "2",
    "CMG_BATCH": "8",
    "CMG_LR": "1e-3",
    "CMG_WARMUP": "1",
    "PERFRAME_HIDDEN": "16",
    "SMOOTHING_STEPS": "5",
    "INVERSION_STEPS": "2",
    "NWAY_TRIALS": "10",
    "N_BOOT": "20",
    "N_SHUFFLES": "10",
    "SHUFFLE_REPEATS": "2",
    "RETRIEVAL_K": "1,5",
}


@pytest.fixture(scope="session")
def tiny_config():
    return build_config(TINY)


@pytest.fixture(scope="session")
def embedder():
    return get_backend("embedder", "toy")


@pytest.fixture(scope="session")
def tokenizer():
    return get_backend("tokenizer", "toy")


@pytest.fixture(scope="session")
def conditioner():
    return get_backend("conditioner", "toy")


@pytest.fixture(scope="session")
def classifier():
    return get_backend("classifier", "toy")


@pytest.fixture(scope="session")
def flow_backend():
    return get_backend("flow", "toy")


@pytest.fixture(scope="session")
def generator_backend():
    return get_backend("generator", "toy")


@pytest.fixture(scope="session")
def raw_splits(tiny_config, embedder):
    train = generate_synthetic_dataset(SyntheticConfig.from_run_config(tiny_config, "train"), embedder)
    test = generate_synthetic_dataset(SyntheticConfig.from_run_config(tiny_config, "test"), embedder)
    return train, test


@pytest.fixture(scope="session")
def prepared_splits(raw_splits, tiny_config):
    train, test, _ = prepare_dataset(*raw_splits, voxel_k=tiny_config.voxel_k)
    return train, test


@pytest.fixture
def rng():
    return np.random.default_rng(0)
