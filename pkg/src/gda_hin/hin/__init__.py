from gda_hin.hin.graph import (
    DomainPair,
    DomainTag,
    HeteroGraph,
    TypeSchema,
    relation_endpoints,
    restrict_to_shared,
)
from gda_hin.hin.io import load_dataset, save_dataset
from gda_hin.hin.laplacian import LaplacianBlock, build_private_laplacian
from gda_hin.hin.synthetic import generate_synthetic_pair

__all__ = [
    "DomainPair",
    "DomainTag",
    "HeteroGraph",
    "LaplacianBlock",
    "TypeSchema",
    "build_private_laplacian",
    "generate_synthetic_pair",
    "load_dataset",
    "relation_endpoints",
    "restrict_to_shared",
    "save_dataset",
]
