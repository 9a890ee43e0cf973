from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping, Sequence

import torch.nn.functional as F
from torch import Tensor

from gda_hin.alignment.autoencoder import nda_total
from gda_hin.completion.block import laplacian_quadratic
from gda_hin.config import TrainConfig
from gda_hin.exceptions import ContractError
from gda_hin.hin.laplacian import LaplacianBlock

Scalar = Tensor | float


@dataclass
class LossComponents:
    """Unweighted loss terms of one training step."""

    cls: Scalar = 0.0
    recon1: Scalar = 0.0
    recon2: Scalar = 0.0
    nda1: Scalar = 0.0
    nda2: Scalar = 0.0
    da: Scalar = 0.0

    @property
    def nda(self) -> Scalar:
        return nda_total([self.nda1], [self.nda2])

    def as_dict(self) -> dict[str, Scalar]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_floats(self) -> dict[str, float]:
        return {name: float(value) for name, value in self.as_dict().items()}


def classifier_loss(
    logits: Tensor,
    labels: Tensor,
    h_private: Sequence[Tensor] = (),
    laplacians: Sequence[LaplacianBlock] = (),
    zeta: float = 0.0,
) -> Tensor:
    """Softmax cross-entropy over the labeled rows plus ``ζ · Σ tr(Hᵀ L^g H)``.

    ``h_private[k]`` holds the private-type hidden states of pair ``k`` in
    ``laplacians[k]`` row order (source nodes first).
    """
    if labels.numel() == 0:
        raise ContractError("classifier loss needs at least one labeled node")
    if logits.shape[0] != labels.shape[0]:
        raise ContractError(f"{logits.shape[0]} logit rows for {labels.shape[0]} labels")
    num_classes = logits.shape[-1]
    if int(labels.max()) >= num_classes or int(labels.min()) < 0:
        raise ContractError(f"label ids must lie in [0, {num_classes})")
    if len(h_private) != len(laplacians):
        raise ContractError(
            f"{len(h_private)} private hidden-state blocks for {len(laplacians)} Laplacians"
        )
    loss = F.cross_entropy(logits, labels)
    if zeta:
        for h, lap in zip(h_private, laplacians):
            loss = loss + zeta * laplacian_quadratic(h, lap)
    return loss


def phase1_loss(components: LossComponents | Mapping[str, Scalar], config: TrainConfig) -> Scalar:
    """``cls + α·recon1 + β·nda1 + γ·da`` on the shared-type pair."""
    c = _as_mapping(components)
    return (
        c["cls"]
        + config.alpha * c.get("recon1", 0.0)
        + config.beta * c.get("nda1", 0.0)
        + config.gamma * c.get("da", 0.0)
    )


def phase2_loss(components: LossComponents | Mapping[str, Scalar], config: TrainConfig) -> Scalar:
    """``cls + α·(recon1 + recon2) + β·nda + γ·da``; ``nda`` defaults to ``nda1 + nda2``."""
    c = _as_mapping(components)
    nda = c["nda"] if "nda" in c else nda_total([c.get("nda1", 0.0)], [c.get("nda2", 0.0)])
    return (
        c["cls"]
        + config.alpha * (c.get("recon1", 0.0) + c.get("recon2", 0.0))
        + config.beta * nda
        + config.gamma * c.get("da", 0.0)
    )


def _as_mapping(components: LossComponents | Mapping[str, Scalar]) -> Mapping[str, Scalar]:
    if isinstance(components, LossComponents):
        return components.as_dict()
    return components


def weighted_total(components: Mapping[str, float], config: TrainConfig, phase: int) -> float:
    """Float recomputation of a phase objective, as written to run reports."""
    total = phase1_loss(components, config) if phase == 1 else phase2_loss(components, config)
    return float(total)
