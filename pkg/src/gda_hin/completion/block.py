"""Cross-domain block matrix completion for private type pairs.

The observed matrix places source and target private-type features on the
diagonal, ``W = [[X_S, 0], [0, X_T]]``; a learnable ``W_hat`` of the same
shape is fitted to the observed blocks under a nuclear-norm penalty, and its
rows serve as common-space features for both domains.
"""
from __future__ import annotations

import logging
from typing import Sequence

import torch
from torch import Tensor, nn

from gda_hin.exceptions import ConfigError, ContractError
from gda_hin.hin.laplacian import LaplacianBlock

logger = logging.getLogger(__name__)


class CompletionBlock(nn.Module):
    """Observed private-type features of one pair plus the learnable ``W_hat``.

    Rows are ordered source nodes first, matching ``LaplacianBlock``.
    """

    def __init__(
        self,
        x_source: Tensor,
        x_target: Tensor,
        delta: float = 0.1,
        init_scale: float = 0.01,
        generator: torch.Generator | None = None,
    ) -> None:
        super().__init__()
        if x_source.numel() == 0 or x_target.numel() == 0:
            raise ContractError("completion blocks need non-empty source and target matrices")
        if x_source.dim() != 2 or x_target.dim() != 2:
            raise ContractError("completion blocks take 2-D feature matrices")
        self.delta = delta
        self.register_buffer("x_source", x_source.detach().clone())
        self.register_buffer("x_target", x_target.detach().clone())
        w_hat = self.observed()
        noise = torch.randn(w_hat.shape, generator=generator, dtype=w_hat.dtype) * init_scale
        self.w_hat = nn.Parameter(torch.where(self.observed_mask(), w_hat, noise))
        self.check_shapes()

    # ------------------------------------------------------------------
    # Shapes and blocks
    # ------------------------------------------------------------------

    @property
    def n_source(self) -> int:
        return self.x_source.shape[0]

    @property
    def n_target(self) -> int:
        return self.x_target.shape[0]

    @property
    def d_source(self) -> int:
        return self.x_source.shape[1]

    @property
    def d_target(self) -> int:
        return self.x_target.shape[1]

    def observed(self) -> Tensor:
        """The block-diagonal observed matrix W."""
        return torch.block_diag(self.x_source, self.x_target)

    def observed_mask(self) -> Tensor:
        mask = torch.zeros(self.n_source + self.n_target, self.d_source + self.d_target, dtype=torch.bool)
        mask[: self.n_source, : self.d_source] = True
        mask[self.n_source :, self.d_source :] = True
        return mask

    @property
    def x_hat_source(self) -> Tensor:
        return self.w_hat[: self.n_source, : self.d_source]

    @property
    def u_hat_source(self) -> Tensor:
        return self.w_hat[: self.n_source, self.d_source :]

    @property
    def u_hat_target(self) -> Tensor:
        return self.w_hat[self.n_source :, : self.d_source]

    @property
    def x_hat_target(self) -> Tensor:
        return self.w_hat[self.n_source :, self.d_source :]

    def check_shapes(self) -> None:
        expected = (self.n_source + self.n_target, self.d_source + self.d_target)
        if tuple(self.w_hat.shape) != expected:
            raise ContractError(f"W_hat has shape {tuple(self.w_hat.shape)}, expected {expected}")

    def reconstruction_error(self) -> Tensor:
        """MSE over the pooled observed entries of both diagonal blocks."""
        squared = (self.x_hat_source - self.x_source).pow(2).sum() + (
            self.x_hat_target - self.x_target
        ).pow(2).sum()
        return squared / (self.x_source.numel() + self.x_target.numel())

    def extra_repr(self) -> str:
        return (
            f"source={self.n_source}x{self.d_source}, target={self.n_target}x{self.d_target}, "
            f"delta={self.delta}"
        )


def assemble_block_matrix(
    x_source: Tensor,
    x_target: Tensor,
    delta: float = 0.1,
    init_scale: float = 0.01,
    generator: torch.Generator | None = None,
) -> CompletionBlock:
    return CompletionBlock(x_source, x_target, delta=delta, init_scale=init_scale, generator=generator)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def nuclear_norm(m: Tensor) -> Tensor:
    """Sum of singular values; differentiable through the SVD."""
    if not torch.isfinite(m).all():
        raise ContractError("nuclear norm of a matrix with non-finite entries")
    return torch.linalg.svdvals(m).sum()


def completion_loss(blocks: Sequence[CompletionBlock]) -> Tensor:
    """``Σ_k [MSE(observed blocks) + δ · ||W_hat||_*]`` over private pairs."""
    if not blocks:
        raise ContractError("completion loss needs at least one block")
    total: Tensor | float = 0.0
    for block in blocks:
        if block.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {block.delta}")
        total = total + block.reconstruction_error() + block.delta * nuclear_norm(block.w_hat)
    return total


def recovered_features(block: CompletionBlock) -> Tensor:
    """Rows of ``W_hat``: per-node features in the common ``d_S + d_T`` space."""
    block.check_shapes()
    return block.w_hat


def laplacian_quadratic(h: Tensor, laplacian: LaplacianBlock) -> Tensor:
    """``tr(Hᵀ L^g H)`` with ``L^g = blockdiag(L_S, L_T)``."""
    if h.shape[0] != laplacian.size:
        raise ContractError(
            f"H has {h.shape[0]} rows but the Laplacian covers {laplacian.size} private nodes"
        )
    if laplacian.size == 0:
        return h.sum() * 0
    lg = laplacian.to_torch(h.dtype).to(h.device)
    return (h * torch.sparse.mm(lg, h)).sum()


def fit_completion(
    block: CompletionBlock,
    steps: int = 2000,
    learning_rate: float = 1e-2,
) -> list[float]:
    """Minimize ``completion_loss`` for one block on its own (Adam, cosine decay).

    Returns the per-step loss trace.
    """
    optimizer = torch.optim.Adam([block.w_hat], lr=learning_rate)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=max(steps, 1))
    trace: list[float] = []
    for step in range(steps):
        optimizer.zero_grad()
        loss = completion_loss([block])
        loss.backward()
        optimizer.step()
        scheduler.step()
        block.check_shapes()
        trace.append(float(loss.detach()))
        if step % 500 == 0:
            logger.debug("completion step %d: loss %.6f", step, trace[-1])
    return trace
