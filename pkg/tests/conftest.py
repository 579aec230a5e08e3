import numpy as np
import pytest
import torch

from opcap.data.records import load_dataset
from opcap.data.types import SceneGraphTriplet, StatePairSample
from opcap.data.vocab import build_vocabulary
from opcap.world.generate import GeneratorConfig, generate_dataset


def make_sample(idx=0, caption="open the lid", graphs_a=None, graphs_b=None, **kw):
    defaults = dict(
        id=f"t{idx:03d}",
        image_a=f"images/t{idx:03d}_a.png",
        image_b=f"images/t{idx:03d}_b.png",
        viewpoint="third_person",
        object_hint="lid",
        caption=caption,
        graphs_a=frozenset(graphs_a or {SceneGraphTriplet("lid", "is", "closed")}),
        graphs_b=frozenset(graphs_b or {SceneGraphTriplet("lid", "is", "open")}),
    )
    defaults.update(kw)
    return StatePairSample(**defaults)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A 40-sample generated dataset shared across tests."""
    root = tmp_path_factory.mktemp("tiny_data")
    generate_dataset(GeneratorConfig(count=40, seed=11), root)
    return root


@pytest.fixture(scope="session")
def tiny_samples(tiny_dataset):
    return load_dataset(tiny_dataset, "train")


@pytest.fixture(scope="session")
def tiny_vocab(tiny_samples):
    return build_vocabulary(tiny_samples, min_count=1)


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)
    np.random.seed(0)
