from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import torch

from gda_hin.exceptions import ContractError, IsolatedPrivateTypeWarning
from gda_hin.hin.graph import DomainPair, DomainTag, HeteroGraph, relation_endpoints

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LaplacianBlock:
    """Unnormalized Laplacians of one private type pair, source rows first."""

    source: sp.csr_matrix
    target: sp.csr_matrix
    isolated: frozenset[DomainTag] = field(default_factory=frozenset)

    @property
    def num_source(self) -> int:
        return self.source.shape[0]

    @property
    def num_target(self) -> int:
        return self.target.shape[0]

    @property
    def size(self) -> int:
        return self.num_source + self.num_target

    def composite(self) -> sp.csr_matrix:
        """Block-diagonal L^g; no entries couple the two domains."""
        return sp.block_diag((self.source, self.target), format="csr")

    def to_torch(self, dtype: torch.dtype = torch.float64) -> torch.Tensor:
        coo = self.composite().tocoo()
        indices = torch.from_numpy(np.vstack([coo.row, coo.col]).astype(np.int64))
        values = torch.from_numpy(coo.data).to(dtype)
        return torch.sparse_coo_tensor(indices, values, coo.shape).coalesce()


def cooccurrence_adjacency(graph: HeteroGraph, node_type: str) -> sp.csr_matrix:
    """Shared-neighbour counts among nodes of ``node_type``.

    Neighbours are ``(type, index)`` pairs reached through any incident
    relation; two nodes sharing k distinct neighbours get weight k.
    """
    n = graph.node_counts[node_type]
    incidence_by_type: dict[str, sp.csr_matrix] = {}

    def add(neighbour_type: str, rows: np.ndarray, cols: np.ndarray) -> None:
        incidence = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, graph.node_counts[neighbour_type])
        )
        if neighbour_type in incidence_by_type:
            incidence = incidence_by_type[neighbour_type] + incidence
        incidence_by_type[neighbour_type] = incidence

    for relation in graph.incident_relations(node_type):
        src_type, dst_type = relation_endpoints(relation)
        pairs = graph.edges[relation]
        if src_type == node_type:
            add(dst_type, pairs[:, 0], pairs[:, 1])
        if dst_type == node_type:
            add(src_type, pairs[:, 1], pairs[:, 0])
    if not incidence_by_type:
        return sp.csr_matrix((n, n))
    blocks = [(m > 0).astype(np.float64) for _, m in sorted(incidence_by_type.items())]
    incidence = sp.hstack(blocks, format="csr")
    adjacency = (incidence @ incidence.T).tolil()
    adjacency.setdiag(0)
    adjacency = adjacency.tocsr()
    adjacency.eliminate_zeros()
    return adjacency


def laplacian(adjacency: sp.spmatrix) -> sp.csr_matrix:
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    result = (sp.diags(degrees) - adjacency).tocsr()
    result.eliminate_zeros()
    return result


def build_private_laplacian(pair: DomainPair, k2: int) -> LaplacianBlock:
    """Co-occurrence Laplacians for the ``k2``-th private type pair."""
    if not 0 <= k2 < pair.schema.k2:
        raise ContractError(f"private pair index {k2} out of range [0, {pair.schema.k2})")
    matrices: dict[DomainTag, sp.csr_matrix] = {}
    isolated: set[DomainTag] = set()
    for side, domain in enumerate(DomainTag):
        node_type = pair.schema.private_pairs[k2][side]
        graph = pair.graph(domain)
        if not graph.incident_relations(node_type):
            isolated.add(domain)
            warnings.warn(
                f"{domain.value} private type {node_type!r} has no incident relations; "
                "its Laplacian is all zero",
                IsolatedPrivateTypeWarning,
                stacklevel=2,
            )
        matrices[domain] = laplacian(cooccurrence_adjacency(graph, node_type))
        logger.debug(
            "%s private type %r: %d nodes, %d co-occurrence entries",
            domain.value, node_type, matrices[domain].shape[0], matrices[domain].nnz,
        )
    return LaplacianBlock(
        source=matrices[DomainTag.SOURCE],
        target=matrices[DomainTag.TARGET],
        isolated=frozenset(isolated),
    )
