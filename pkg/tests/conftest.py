"""Shared test configuration and fixtures."""
import numpy as np
import pytest
import torch

from gda_hin.hin.graph import DomainPair, DomainTag, HeteroGraph, TypeSchema
from gda_hin.testing import ConstantDiscriminator, tiny_train_config, toy_pair

__all__ = ["ConstantDiscriminator"]


@pytest.fixture
def pair() -> DomainPair:
    """Twenty-node synthetic pair with one private type pair (T ~ F)."""
    return toy_pair()


@pytest.fixture
def tiny_config():
    return tiny_train_config()


@pytest.fixture
def half_disc() -> ConstantDiscriminator:
    return ConstantDiscriminator(0.5)


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)


@pytest.fixture
def small_schema() -> TypeSchema:
    """P/A shared, T~F private, authors carry two classes."""
    return TypeSchema(
        shared_pairs=(("P", "P"), ("A", "A")),
        private_pairs=(("T", "F"),),
        relation_pairs=(("P-A", "P-A"), ("P-T", "P-F")),
        target_class_type="A",
        num_classes=2,
    )


@pytest.fixture
def small_pair(small_schema) -> DomainPair:
    rng = np.random.default_rng(0)
    source = HeteroGraph(
        domain_tag=DomainTag.SOURCE,
        node_counts={"P": 3, "A": 2, "T": 2},
        features={"P": rng.normal(size=(3, 2)), "A": rng.normal(size=(2, 2)), "T": rng.normal(size=(2, 3))},
        edges={"P-A": [[0, 0], [1, 1], [2, 1]], "P-T": [[0, 0], [0, 1], [1, 1]]},
        labels=[0, 1],
    )
    target = HeteroGraph(
        domain_tag=DomainTag.TARGET,
        node_counts={"P": 2, "A": 2, "F": 3},
        features={"P": rng.normal(size=(2, 2)), "A": rng.normal(size=(2, 2)), "F": rng.normal(size=(3, 1))},
        edges={"P-A": [[0, 0], [1, 1]], "P-F": [[0, 0], [1, 1], [1, 2]]},
    )
    return DomainPair(source=source, target=target, schema=small_schema, held_out_labels=[1, 0])
