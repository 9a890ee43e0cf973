"""Type-aware graph transformer used as the shared feature extractor G.

A simplified HGT layer: per-type key/query/value/output projections,
per-relation attention and message matrices with a scalar priority, softmax
over every typed in-neighbour of a node, and a residual update. No temporal
encoding and no subgraph sampling; every forward pass covers the full graph.
Each relation is used in both directions, so ``L`` layers see exactly the
``L``-hop neighbourhood.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Collection, Mapping

import numpy as np
import torch
from torch import Tensor, nn

from gda_hin.alignment.autoencoder import TypeDiscriminator, domain_adversarial_bce, make_activation
from gda_hin.exceptions import ConfigError, ContractError
from gda_hin.hin.graph import DomainTag, HeteroGraph, relation_endpoints

REVERSE_SUFFIX = "^rev"


@dataclass
class HgtConfig:
    num_layers: int = 2
    num_heads: int = 4
    hidden_dim: int = 64
    dropout: float = 0.1
    activation: str = "gelu"

    def __post_init__(self) -> None:
        if self.num_layers < 0:
            raise ConfigError(f"num_layers must be >= 0, got {self.num_layers}")
        if self.num_heads <= 0 or self.hidden_dim % self.num_heads:
            raise ConfigError(
                f"hidden_dim {self.hidden_dim} is not divisible by num_heads {self.num_heads}"
            )

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.num_heads


@dataclass
class NodeEmbeddings:
    domain_tag: DomainTag
    embeddings: dict[str, Tensor] = field(default_factory=dict)

    def __getitem__(self, node_type: str) -> Tensor:
        return self.embeddings[node_type]


# ---------------------------------------------------------------------------
# Message graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypedEdges:
    relation_key: str
    src_type: str
    dst_type: str
    src_index: Tensor
    dst_index: Tensor


@dataclass(frozen=True)
class MessageGraph:
    """Directed typed edge lists (both directions of every relation) as tensors.

    ``type_keys`` maps the graph's type names onto parameter-table keys, so
    paired types of the two domains share parameters.
    """

    node_counts: Mapping[str, int]
    type_keys: Mapping[str, str]
    edges: tuple[TypedEdges, ...]

    @classmethod
    def from_graph(
        cls,
        graph: HeteroGraph,
        type_keys: Mapping[str, str] | None = None,
        relation_keys: Mapping[str, str] | None = None,
    ) -> MessageGraph:
        type_keys = dict(type_keys) if type_keys is not None else {t: t for t in graph.node_types}
        relation_keys = dict(relation_keys) if relation_keys is not None else {r: r for r in graph.edges}
        edges: list[TypedEdges] = []
        for relation, pairs in graph.edges.items():
            if relation not in relation_keys:
                raise ConfigError(f"relation {relation!r} has no parameter key")
            src_type, dst_type = relation_endpoints(relation)
            src = torch.from_numpy(np.ascontiguousarray(pairs[:, 0]))
            dst = torch.from_numpy(np.ascontiguousarray(pairs[:, 1]))
            key = relation_keys[relation]
            edges.append(TypedEdges(key, src_type, dst_type, src, dst))
            edges.append(TypedEdges(key + REVERSE_SUFFIX, dst_type, src_type, dst, src))
        return cls(node_counts=dict(graph.node_counts), type_keys=type_keys, edges=tuple(edges))

    def in_degree(self, node_type: str) -> Tensor:
        degree = torch.zeros(self.node_counts[node_type], dtype=torch.long)
        for e in self.edges:
            if e.dst_type == node_type:
                degree.index_add_(0, e.dst_index, torch.ones_like(e.dst_index))
        return degree


def segment_softmax(scores: Tensor, index: Tensor, num_segments: int) -> Tensor:
    """Softmax of ``scores`` (E, H) within groups of rows sharing ``index``."""
    expanded = index.unsqueeze(-1).expand_as(scores)
    maxima = torch.full((num_segments, scores.shape[1]), -math.inf, dtype=scores.dtype)
    maxima = maxima.scatter_reduce(0, expanded, scores.detach(), reduce="amax", include_self=True)
    exp = (scores - maxima[index]).exp()
    denom = torch.zeros((num_segments, scores.shape[1]), dtype=scores.dtype).index_add(0, index, exp)
    return exp / denom[index]


# ---------------------------------------------------------------------------
# Layer and extractor
# ---------------------------------------------------------------------------

class HgtLayer(nn.Module):
    def __init__(
        self,
        type_keys: list[str],
        relation_keys: list[str],
        hidden_dim: int = 64,
        num_heads: int = 4,
        dropout: float = 0.1,
        activation: str = "gelu",
    ) -> None:
        super().__init__()
        if hidden_dim % num_heads:
            raise ConfigError(f"hidden_dim {hidden_dim} is not divisible by num_heads {num_heads}")
        self.hidden_dim = hidden_dim
        self.num_heads = num_heads
        self.head_dim = hidden_dim // num_heads
        self.k_linears = nn.ModuleDict({t: nn.Linear(hidden_dim, hidden_dim) for t in type_keys})
        self.q_linears = nn.ModuleDict({t: nn.Linear(hidden_dim, hidden_dim) for t in type_keys})
        self.v_linears = nn.ModuleDict({t: nn.Linear(hidden_dim, hidden_dim) for t in type_keys})
        self.a_linears = nn.ModuleDict({t: nn.Linear(hidden_dim, hidden_dim) for t in type_keys})
        directed = [k for r in relation_keys for k in (r, r + REVERSE_SUFFIX)]
        self.relation_att = nn.ParameterDict({k: self._relation_matrix() for k in directed})
        self.relation_msg = nn.ParameterDict({k: self._relation_matrix() for k in directed})
        self.relation_pri = nn.ParameterDict({k: nn.Parameter(torch.ones(())) for k in directed})
        self.activation = make_activation(activation)
        self.drop = nn.Dropout(dropout)

    def _relation_matrix(self) -> nn.Parameter:
        weight = torch.empty(self.num_heads, self.head_dim, self.head_dim)
        nn.init.xavier_uniform_(weight)
        return nn.Parameter(weight)

    def _linear(self, table: nn.ModuleDict, graph: MessageGraph, node_type: str) -> nn.Module:
        key = graph.type_keys.get(node_type, node_type)
        if key not in table:
            raise ConfigError(f"node type {node_type!r} (key {key!r}) has no parameters in this layer")
        return table[key]

    def attention(
        self,
        graph: MessageGraph,
        h: Mapping[str, Tensor],
        dst_types: Collection[str] | None = None,
    ) -> dict[str, tuple[Tensor, Tensor, Tensor]]:
        """Per destination type: ``(dst_index, weights (E, H), messages (E, H, d_k))``.

        With ``dst_types`` only edges into those types are scored.
        """
        heads, d_k = self.num_heads, self.head_dim
        wanted = set(h) if dst_types is None else set(dst_types) & set(h)
        by_dst: dict[str, list[tuple[Tensor, Tensor, Tensor]]] = {}
        queries = {
            t: self._linear(self.q_linears, graph, t)(h[t]).view(-1, heads, d_k) for t in wanted
        }
        for e in graph.edges:
            if e.dst_type not in wanted:
                continue
            if e.relation_key not in self.relation_att:
                raise ConfigError(f"relation {e.relation_key!r} has no parameters in this layer")
            x_src = h[e.src_type]
            k = self._linear(self.k_linears, graph, e.src_type)(x_src).view(-1, heads, d_k)[e.src_index]
            v = self._linear(self.v_linears, graph, e.src_type)(x_src).view(-1, heads, d_k)[e.src_index]
            k = torch.einsum("ehd,hdf->ehf", k, self.relation_att[e.relation_key])
            v = torch.einsum("ehd,hdf->ehf", v, self.relation_msg[e.relation_key])
            q = queries[e.dst_type][e.dst_index]
            scores = (q * k).sum(-1) * self.relation_pri[e.relation_key] / math.sqrt(d_k)
            by_dst.setdefault(e.dst_type, []).append((e.dst_index, scores, v))
        result: dict[str, tuple[Tensor, Tensor, Tensor]] = {}
        for dst_type, parts in by_dst.items():
            index = torch.cat([p[0] for p in parts])
            scores = torch.cat([p[1] for p in parts])
            messages = torch.cat([p[2] for p in parts])
            weights = segment_softmax(scores, index, graph.node_counts[dst_type])
            result[dst_type] = (index, weights, messages)
        return result

    def forward(
        self,
        graph: MessageGraph,
        h: Mapping[str, Tensor],
        dst_types: Collection[str] | None = None,
    ) -> dict[str, Tensor]:
        """One update of every node type, or only of ``dst_types`` when given."""
        missing = set(graph.node_counts) - set(h)
        if missing:
            raise ContractError(f"no input embeddings for node types {sorted(missing)}")
        attended = self.attention(graph, h, dst_types)
        out: dict[str, Tensor] = {}
        for node_type, x in h.items():
            if dst_types is not None and node_type not in dst_types:
                continue
            if node_type not in attended:
                out[node_type] = x
                continue
            index, weights, messages = attended[node_type]
            aggregated = torch.zeros(
                (x.shape[0], self.num_heads, self.head_dim), dtype=x.dtype
            ).index_add(0, index, weights.unsqueeze(-1) * messages)
            update = self.drop(
                self._linear(self.a_linears, graph, node_type)(
                    self.activation(aggregated.reshape(x.shape[0], self.hidden_dim))
                )
            )
            has_neighbours = torch.zeros(x.shape[0], dtype=torch.bool)
            has_neighbours[index] = True
            out[node_type] = x + update * has_neighbours.unsqueeze(-1).to(x.dtype)
        return out


class HgtExtractor(nn.Module):
    """``num_layers`` stacked HgtLayers with parameters shared across domains."""

    def __init__(self, config: HgtConfig, type_keys: list[str], relation_keys: list[str]) -> None:
        super().__init__()
        self.config = config
        self.layers = nn.ModuleList(
            HgtLayer(
                type_keys,
                relation_keys,
                hidden_dim=config.hidden_dim,
                num_heads=config.num_heads,
                dropout=config.dropout,
                activation=config.activation,
            )
            for _ in range(config.num_layers)
        )

    def forward(
        self,
        graph: MessageGraph,
        h: Mapping[str, Tensor],
        outputs: Collection[str] | None = None,
    ) -> dict[str, Tensor]:
        """Final embeddings of every type, or of ``outputs`` only.

        With ``outputs`` the last layer only updates those destination types.
        """
        out = dict(h)
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            out = layer(graph, out, outputs if i == last else None)
        if outputs is not None:
            out = {t: x for t, x in out.items() if t in outputs}
        return out


class TopoDiscriminator(TypeDiscriminator):
    """Domain discriminator over extractor outputs."""


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def hgt_layer_forward(
    graph: HeteroGraph,
    inputs: NodeEmbeddings,
    layer: HgtLayer,
    type_keys: Mapping[str, str] | None = None,
    relation_keys: Mapping[str, str] | None = None,
) -> NodeEmbeddings:
    message_graph = MessageGraph.from_graph(graph, type_keys, relation_keys)
    return NodeEmbeddings(graph.domain_tag, layer(message_graph, inputs.embeddings))


def extract(
    graph: HeteroGraph,
    initial: NodeEmbeddings,
    extractor: HgtExtractor,
    type_keys: Mapping[str, str] | None = None,
    relation_keys: Mapping[str, str] | None = None,
) -> NodeEmbeddings:
    """h-hop structure embeddings: ``num_layers`` layer passes over the full graph."""
    message_graph = MessageGraph.from_graph(graph, type_keys, relation_keys)
    missing = set(graph.node_types) - set(initial.embeddings)
    if missing:
        raise ContractError(f"no initial embeddings for node types {sorted(missing)}")
    return NodeEmbeddings(graph.domain_tag, extractor(message_graph, initial.embeddings))


def topo_da_loss(
    h_source: Tensor,
    h_target: Tensor,
    disc: TopoDiscriminator,
    grl_coefficient: float = 1.0,
) -> Tensor:
    """Topological domain adversarial loss on extractor outputs."""
    return domain_adversarial_bce(h_source, h_target, disc, grl_coefficient)
