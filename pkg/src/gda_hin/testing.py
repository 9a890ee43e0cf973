"""Test doubles for gda_hin.

Small deterministic domain pairs and fixed-output modules for exercising
losses and layers without training anything.
"""
from __future__ import annotations

from typing import Any

import torch
from torch import Tensor, nn

from gda_hin.alignment.autoencoder import PROB_EPS
from gda_hin.config import SyntheticConfig, TrainConfig
from gda_hin.hin.graph import DomainPair
from gda_hin.hin.synthetic import generate_synthetic_pair
from gda_hin.topology.hgt import HgtLayer


class ConstantDiscriminator(nn.Module):
    """Discriminator that outputs ``value`` for every row.

    Example::

        from gda_hin.testing import ConstantDiscriminator
        from gda_hin.alignment import nda_loss

        nda_loss(h_s, h_t, ConstantDiscriminator(0.5))   # ln 2
    """

    def __init__(self, value: float = 0.5) -> None:
        super().__init__()
        self.value = value

    def logits(self, h: Tensor) -> Tensor:
        constant = torch.logit(torch.full(h.shape[:-1], self.value, dtype=h.dtype), eps=PROB_EPS)
        # zero-weighted input term keeps the autograd graph connected
        return constant + 0.0 * h.sum(-1)

    def forward(self, h: Tensor) -> Tensor:
        return torch.sigmoid(self.logits(h))


def toy_config(**overrides: Any) -> SyntheticConfig:
    """Twenty source nodes (7 P, 6 A, 2 V, 5 T) and 19 target nodes (4 F)."""
    values: dict[str, Any] = dict(
        classes=2, papers=7, authors=6, venues=2, source_private=5, target_private=4,
        dim_paper=4, dim_author=3, dim_venue=2, dim_source_private=3, dim_target_private=2,
        authors_per_paper=2.0, privates_per_paper=2.0, homophily=0.9, separation=2.0,
        shift=0.5, seed=7,
    )
    values.update(overrides)
    return SyntheticConfig(**values)


def toy_pair(**overrides: Any) -> DomainPair:
    return generate_synthetic_pair(toy_config(**overrides))


def tiny_train_config(**overrides: Any) -> TrainConfig:
    """Fast float64 config: d_h=8, two heads, no dropout, three epochs per phase."""
    values: dict[str, Any] = dict(
        hidden_dim=8, num_heads=2, disc_hidden=4, num_layers=2, dropout=0.0,
        epochs_phase1=3, epochs_phase2=3, learning_rate=1e-2, dtype="float64",
        pseudo_threshold=0.5, pseudo_max_fraction=1.0, log_every=0,
    )
    values.update(overrides)
    return TrainConfig(**values)


@torch.no_grad()
def set_identity_parameters(layer: HgtLayer) -> HgtLayer:
    """Identity projections, identity relation matrices, unit priorities."""
    for table in (layer.k_linears, layer.q_linears, layer.v_linears, layer.a_linears):
        for linear in table.values():
            linear.weight.copy_(torch.eye(linear.out_features, linear.in_features))
            linear.bias.zero_()
    eye = torch.eye(layer.head_dim).expand(layer.num_heads, -1, -1)
    for table in (layer.relation_att, layer.relation_msg):
        for weight in table.values():
            weight.copy_(eye)
    for priority in layer.relation_pri.values():
        priority.fill_(1.0)
    return layer
