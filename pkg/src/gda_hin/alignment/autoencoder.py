from __future__ import annotations

from typing import Sequence

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from gda_hin.alignment.grl import grl_apply
from gda_hin.exceptions import ConfigError, ContractError

# Discriminator probabilities stay inside [PROB_EPS, 1 - PROB_EPS].
PROB_EPS = 1e-7


def make_activation(name: str) -> nn.Module:
    activations = {"gelu": nn.GELU, "relu": nn.ReLU, "tanh": nn.Tanh, "identity": nn.Identity}
    try:
        return activations[name]()
    except KeyError:
        raise ConfigError(f"unknown activation {name!r}") from None


class TypeAutoencoder(nn.Module):
    """Pairwise node-type autoencoder: one affine map + nonlinearity each way."""

    def __init__(self, input_dim: int, hidden_dim: int = 64, activation: str = "tanh") -> None:
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.encoder = nn.Sequential(nn.Linear(input_dim, hidden_dim), make_activation(activation))
        self.decoder = nn.Linear(hidden_dim, input_dim)

    def encode(self, x: Tensor) -> Tensor:
        return self.encoder(x)

    def decode(self, h: Tensor) -> Tensor:
        return self.decoder(h)

    def forward(self, x: Tensor) -> tuple[Tensor, Tensor]:
        hidden = self.encode(x)
        return hidden, self.decode(hidden)


class TypeDiscriminator(nn.Module):
    """Domain discriminator ``d_h → hidden → 1`` with a logistic output.

    The output is P(domain = target). Losses read ``logits`` so saturated
    rows keep their gradient.
    """

    def __init__(self, hidden_dim: int = 64, disc_hidden: int = 32) -> None:
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(hidden_dim, disc_hidden),
            nn.ReLU(),
            nn.Linear(disc_hidden, 1),
        )

    def logits(self, h: Tensor) -> Tensor:
        return self.net(h).squeeze(-1)

    def forward(self, h: Tensor) -> Tensor:
        return torch.sigmoid(self.logits(h)).clamp(PROB_EPS, 1 - PROB_EPS)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def recon_loss_shared(pairs: Sequence[tuple[Tensor, Tensor]]) -> Tensor:
    """Sum over type pairs of the mean squared reconstruction error."""
    total = torch.zeros(())
    for x, x_hat in pairs:
        if x.shape != x_hat.shape:
            raise ContractError(f"reconstruction shape {tuple(x_hat.shape)} != input {tuple(x.shape)}")
        total = total + F.mse_loss(x_hat, x)
    return total


def domain_adversarial_bce(
    source: Tensor,
    target: Tensor,
    discriminator: nn.Module,
    grl_coefficient: float = 1.0,
) -> Tensor:
    """Discriminator BCE with source labelled 0 and target 1, averaged per domain.

    Inputs pass through gradient reversal, so minimizing this trains the
    discriminator while pushing whatever produced the inputs the other way.
    """
    if source.shape[0] == 0 or target.shape[0] == 0:
        raise ContractError("domain adversarial loss needs at least one sample per domain")
    if source.shape[1:] != target.shape[1:]:
        raise ContractError(
            f"source/target widths differ: {tuple(source.shape[1:])} vs {tuple(target.shape[1:])}"
        )
    z_source = discriminator.logits(grl_apply(source, grl_coefficient))
    z_target = discriminator.logits(grl_apply(target, grl_coefficient))
    return (
        F.binary_cross_entropy_with_logits(z_source, torch.zeros_like(z_source))
        + F.binary_cross_entropy_with_logits(z_target, torch.ones_like(z_target))
    ) / 2


def nda_loss(
    encoded_source: Tensor,
    encoded_target: Tensor,
    disc: TypeDiscriminator,
    grl_coefficient: float = 1.0,
) -> Tensor:
    """Node-type domain adversarial loss of one type pair."""
    return domain_adversarial_bce(encoded_source, encoded_target, disc, grl_coefficient)


def nda_total(shared_losses: Sequence[Tensor | float], private_losses: Sequence[Tensor | float]) -> Tensor | float:
    """``L_nda = L_nda1 + L_nda2`` over all type pairs."""
    return sum(shared_losses, 0.0) + sum(private_losses, 0.0)
