"""All learnable parameters of the adaptation model and its full-graph forward pass."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from torch import Tensor, nn

from gda_hin.alignment.autoencoder import (
    TypeAutoencoder,
    TypeDiscriminator,
    nda_loss,
    recon_loss_shared,
)
from gda_hin.completion.block import CompletionBlock, completion_loss, recovered_features
from gda_hin.config import TrainConfig
from gda_hin.hin.graph import DomainPair, DomainTag, TypeSchema
from gda_hin.hin.laplacian import LaplacianBlock, build_private_laplacian
from gda_hin.topology.hgt import HgtConfig, HgtExtractor, MessageGraph, TopoDiscriminator, topo_da_loss
from gda_hin.training.losses import LossComponents

logger = logging.getLogger(__name__)

DTYPES = {"float32": torch.float32, "float64": torch.float64}


# ---------------------------------------------------------------------------
# Tensor views of a DomainPair
# ---------------------------------------------------------------------------

@dataclass
class DomainInputs:
    domain: DomainTag
    features: dict[str, Tensor]
    message_graph: MessageGraph
    class_type: str


@dataclass
class PairInputs:
    """Feature tensors, message graphs and source labels of one pair, built once per run."""

    schema: TypeSchema
    source: DomainInputs
    target: DomainInputs
    source_labels: Tensor

    @classmethod
    def from_pair(cls, pair: DomainPair, dtype: torch.dtype = torch.float32) -> PairInputs:
        domains = {}
        for domain in DomainTag:
            graph = pair.graph(domain)
            type_keys = {t: pair.schema.type_key(domain, t) for t in graph.node_types}
            relation_keys = {r: pair.schema.relation_key(domain, r) for r in graph.edges}
            domains[domain] = DomainInputs(
                domain=domain,
                features={t: torch.as_tensor(x, dtype=dtype) for t, x in graph.features.items()},
                message_graph=MessageGraph.from_graph(graph, type_keys, relation_keys),
                class_type=pair.schema.class_type(domain),
            )
        return cls(
            schema=pair.schema,
            source=domains[DomainTag.SOURCE],
            target=domains[DomainTag.TARGET],
            source_labels=torch.as_tensor(np.asarray(pair.source.labels), dtype=torch.long),
        )

    @property
    def uses_private(self) -> bool:
        return bool(self.schema.private_pairs)

    def domain(self, domain: DomainTag) -> DomainInputs:
        return self.source if DomainTag(domain) is DomainTag.SOURCE else self.target


@dataclass
class ForwardPass:
    embeddings: dict[DomainTag, dict[str, Tensor]]
    logits_source: Tensor
    logits_target: Tensor
    components: LossComponents
    private_hidden: list[Tensor] = field(default_factory=list)
    laplacians: list[LaplacianBlock] = field(default_factory=list)


# ---------------------------------------------------------------------------
# ModelState
# ---------------------------------------------------------------------------

class ModelState(nn.Module):
    """Autoencoders, discriminators, completion blocks, extractor and classifier.

    Per-type tables are keyed by the schema's pair keys, so both domains of
    a pair share one entry. Built from the full pair; shared-only forward
    passes simply leave the private modules untouched.
    """

    def __init__(
        self,
        schema: TypeSchema,
        shared_dims: dict[str, int],
        private_features: dict[str, tuple[Tensor, Tensor]],
        laplacians: dict[str, LaplacianBlock],
        config: TrainConfig,
    ) -> None:
        super().__init__()
        self.schema = schema
        self.config = config
        self.uses_private = False
        d_h = config.hidden_dim
        self.shared_autoencoders = nn.ModuleDict(
            {k: TypeAutoencoder(d, d_h, config.activation) for k, d in shared_dims.items()}
        )
        self.shared_discriminators = nn.ModuleDict(
            {k: TypeDiscriminator(d_h, config.disc_hidden) for k in shared_dims}
        )
        self.completion = nn.ModuleDict(
            {
                k: CompletionBlock(xs, xt, delta=config.delta, init_scale=config.init_scale)
                for k, (xs, xt) in private_features.items()
            }
        )
        self.private_autoencoders = nn.ModuleDict(
            {
                k: TypeAutoencoder(block.d_source + block.d_target, d_h, config.activation)
                for k, block in self.completion.items()
            }
        )
        self.private_discriminators = nn.ModuleDict(
            {k: TypeDiscriminator(d_h, config.disc_hidden) for k in private_features}
        )
        self.laplacians = dict(laplacians)
        type_keys = list(shared_dims) + list(private_features)
        relation_keys = [schema.relation_key(DomainTag.SOURCE, r) for r, _ in schema.relation_pairs]
        self.extractor = HgtExtractor(
            HgtConfig(
                num_layers=config.num_layers,
                num_heads=config.num_heads,
                hidden_dim=d_h,
                dropout=config.dropout,
                activation=config.activation,
            ),
            type_keys,
            relation_keys,
        )
        self.topo_discriminator = TopoDiscriminator(d_h, config.disc_hidden)
        self.classifier = nn.Linear(d_h, schema.num_classes)

    @classmethod
    def for_pair(cls, pair: DomainPair, config: TrainConfig) -> ModelState:
        """Initialize every parameter for ``pair`` under ``torch.manual_seed(config.seed)``."""
        torch.manual_seed(config.seed)
        dtype = DTYPES[config.dtype]
        schema = pair.schema
        shared_dims = {
            schema.type_key(DomainTag.SOURCE, s): pair.source.feature_dim(s)
            for s, _ in schema.shared_pairs
        }
        private_features: dict[str, tuple[Tensor, Tensor]] = {}
        laplacians: dict[str, LaplacianBlock] = {}
        for k2, (s, t) in enumerate(schema.private_pairs):
            key = schema.type_key(DomainTag.SOURCE, s)
            private_features[key] = (
                torch.as_tensor(pair.source.features[s], dtype=dtype),
                torch.as_tensor(pair.target.features[t], dtype=dtype),
            )
            laplacians[key] = build_private_laplacian(pair, k2)
        model = cls(schema, shared_dims, private_features, laplacians, config).to(dtype)
        logger.debug(
            "model for %d shared / %d private pairs: %d parameters",
            schema.k1, schema.k2, sum(p.numel() for p in model.parameters()),
        )
        return model

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def forward(self, inputs: PairInputs, grl_coefficient: float = 1.0) -> ForwardPass:
        schema = inputs.schema
        components = LossComponents()
        initial: dict[DomainTag, dict[str, Tensor]] = {DomainTag.SOURCE: {}, DomainTag.TARGET: {}}

        recon_pairs: list[tuple[Tensor, Tensor]] = []
        nda1: list[Tensor] = []
        for s, t in schema.shared_pairs:
            key = schema.type_key(DomainTag.SOURCE, s)
            autoencoder = self.shared_autoencoders[key]
            x_s, x_t = inputs.source.features[s], inputs.target.features[t]
            h_s, r_s = autoencoder(x_s)
            h_t, r_t = autoencoder(x_t)
            recon_pairs.append((torch.cat([x_s, x_t]), torch.cat([r_s, r_t])))
            nda1.append(nda_loss(h_s, h_t, self.shared_discriminators[key], grl_coefficient))
            initial[DomainTag.SOURCE][s] = h_s
            initial[DomainTag.TARGET][t] = h_t
        components.recon1 = recon_loss_shared(recon_pairs)
        components.nda1 = sum(nda1, torch.zeros((), dtype=components.recon1.dtype))

        private_keys: list[tuple[str, str, str]] = []
        if inputs.uses_private:
            recon2: list[Tensor] = []
            nda2: list[Tensor] = []
            for s, t in schema.private_pairs:
                key = schema.type_key(DomainTag.SOURCE, s)
                block = self.completion[key]
                w_hat = recovered_features(block)
                hidden, recon = self.private_autoencoders[key](w_hat)
                recon2.append(completion_loss([block]) + F.mse_loss(recon, w_hat))
                h_s, h_t = hidden[: block.n_source], hidden[block.n_source :]
                nda2.append(nda_loss(h_s, h_t, self.private_discriminators[key], grl_coefficient))
                initial[DomainTag.SOURCE][s] = h_s
                initial[DomainTag.TARGET][t] = h_t
                private_keys.append((key, s, t))
            components.recon2 = sum(recon2, torch.zeros((), dtype=components.recon1.dtype))
            components.nda2 = sum(nda2, torch.zeros((), dtype=components.recon1.dtype))

        readout: dict[DomainTag, set[str] | None] = {DomainTag.SOURCE: None, DomainTag.TARGET: None}
        if not self.config.topo_all_types:
            readout[DomainTag.SOURCE] = {inputs.source.class_type, *(s for _, s, _ in private_keys)}
            readout[DomainTag.TARGET] = {inputs.target.class_type, *(t for _, _, t in private_keys)}
        embeddings = {
            domain: self.extractor(inputs.domain(domain).message_graph, initial[domain], readout[domain])
            for domain in DomainTag
        }
        z_source = embeddings[DomainTag.SOURCE][inputs.source.class_type]
        z_target = embeddings[DomainTag.TARGET][inputs.target.class_type]
        if self.config.topo_all_types:
            components.da = topo_da_loss(
                torch.cat(list(embeddings[DomainTag.SOURCE].values())),
                torch.cat(list(embeddings[DomainTag.TARGET].values())),
                self.topo_discriminator,
                grl_coefficient,
            )
        else:
            components.da = topo_da_loss(z_source, z_target, self.topo_discriminator, grl_coefficient)

        return ForwardPass(
            embeddings=embeddings,
            logits_source=self.classifier(z_source),
            logits_target=self.classifier(z_target),
            components=components,
            private_hidden=[
                torch.cat([embeddings[DomainTag.SOURCE][s], embeddings[DomainTag.TARGET][t]])
                for _, s, t in private_keys
            ],
            laplacians=[self.laplacians[key] for key, _, _ in private_keys],
        )

    def freeze_completion(self) -> None:
        for block in self.completion.values():
            block.w_hat.requires_grad_(False)

    def tensor_shapes(self) -> dict[str, list[int]]:
        return {name: list(t.shape) for name, t in self.state_dict().items()}
