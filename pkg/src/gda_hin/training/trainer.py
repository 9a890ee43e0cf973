"""Two-phase optimization: shared-type warm-up, then the full objective with pseudo labels.

Both phases take full-graph steps with one Adam optimizer over every
parameter; the adversarial terms get their min/max behaviour from gradient
reversal alone.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from gda_hin.config import Ablation, TrainConfig
from gda_hin.exceptions import ContractError, TrainingError
from gda_hin.hin.graph import DomainPair, DomainTag, restrict_to_shared
from gda_hin.training.losses import (
    classifier_loss,
    phase1_loss,
    phase2_loss,
    weighted_total,
)
from gda_hin.training.model import DTYPES, ForwardPass, ModelState, PairInputs
from gda_hin.training.pseudo import PseudoLabelSet, select_pseudo_labels

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    phase: int
    epoch: int
    grl_coefficient: float
    cls: float
    recon1: float
    recon2: float
    nda1: float
    nda2: float
    da: float
    total: float


@dataclass
class PhaseResult:
    model: ModelState
    target_probabilities: np.ndarray
    history: list[EpochRecord] = field(default_factory=list)
    pseudo_labels: PseudoLabelSet = field(default_factory=PseudoLabelSet.empty)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def train_phase1(pair: DomainPair, config: TrainConfig) -> PhaseResult:
    """Train on the shared-type pair with source labels only."""
    cfg = config.effective()
    model = ModelState.for_pair(pair, cfg)
    shared = restrict_to_shared(pair)
    inputs = PairInputs.from_pair(shared, DTYPES[cfg.dtype])
    history = _optimize(model, inputs, cfg, phase=1, epochs=cfg.epochs_phase1)
    model.uses_private = False
    return PhaseResult(model=model, target_probabilities=predict_proba(model, pair), history=history)


def train_phase2(pair: DomainPair, phase1: PhaseResult, config: TrainConfig) -> PhaseResult:
    """Optimize the full objective, warm-started from ``phase1`` unless disabled.

    ``phase1`` is not modified. Under ``no_da`` no second phase exists and
    ``phase1`` is returned unchanged.
    """
    cfg = config.effective()
    if cfg.ablation is Ablation.NO_DA:
        logger.info("ablation %s: skipping phase II", cfg.ablation)
        return phase1
    pseudo = select_pseudo_labels(phase1.target_probabilities, cfg)
    if cfg.warm_start:
        model = copy.deepcopy(phase1.model)
    else:
        model = ModelState.for_pair(pair, cfg)
    train_pair = restrict_to_shared(pair) if cfg.ablation is Ablation.W_S else pair
    if cfg.ablation is Ablation.WO_P:
        model.freeze_completion()
    inputs = PairInputs.from_pair(train_pair, DTYPES[cfg.dtype])
    history = _optimize(model, inputs, cfg, phase=2, epochs=cfg.epochs_phase2, pseudo=pseudo)
    model.uses_private = inputs.uses_private
    return PhaseResult(
        model=model,
        target_probabilities=predict_proba(model, pair),
        history=history,
        pseudo_labels=pseudo,
    )


def predict_proba(model: ModelState, pair: DomainPair, domain: DomainTag = DomainTag.TARGET) -> np.ndarray:
    """Class probabilities of ``domain``'s class-type nodes (float64, rows sum to 1)."""
    out = _eval_forward(model, pair)
    logits = out.logits_source if DomainTag(domain) is DomainTag.SOURCE else out.logits_target
    probs = torch.softmax(logits.to(torch.float64), dim=-1).numpy()
    return probs / probs.sum(axis=1, keepdims=True)


def class_embeddings(model: ModelState, pair: DomainPair) -> dict[DomainTag, np.ndarray]:
    """Extractor outputs of the class-type nodes of both domains."""
    out = _eval_forward(model, pair)
    return {
        domain: out.embeddings[domain][pair.schema.class_type(domain)].to(torch.float64).numpy()
        for domain in DomainTag
    }


def evaluate(model: ModelState, pair: DomainPair) -> float:
    """Target-domain classification accuracy against ``pair.held_out_labels``."""
    if pair.held_out_labels is None:
        raise ContractError("evaluation needs held-out target labels")
    predictions = predict_proba(model, pair).argmax(axis=1)
    return accuracy(predictions, pair.held_out_labels)


def accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    predictions, labels = np.asarray(predictions), np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ContractError(f"{predictions.shape[0]} predictions for {labels.shape[0]} labels")
    if labels.size == 0:
        raise ContractError("accuracy of an empty label set")
    return float(np.mean(predictions == labels))


def confusion_matrix(predictions: np.ndarray, labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Counts with true classes on rows and predicted classes on columns."""
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (np.asarray(labels), np.asarray(predictions)), 1)
    return matrix


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------

def _eval_forward(model: ModelState, pair: DomainPair) -> ForwardPass:
    view = pair if model.uses_private else restrict_to_shared(pair)
    inputs = PairInputs.from_pair(view, DTYPES[model.config.dtype])
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            return model(inputs, grl_coefficient=0.0)
    finally:
        model.train(was_training)


def _optimize(
    model: ModelState,
    inputs: PairInputs,
    config: TrainConfig,
    *,
    phase: int,
    epochs: int,
    pseudo: PseudoLabelSet | None = None,
) -> list[EpochRecord]:
    torch.manual_seed(config.seed + phase)
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=config.learning_rate, weight_decay=config.weight_decay)
    objective = phase1_loss if phase == 1 else phase2_loss
    pseudo_index = torch.as_tensor(pseudo.indices if pseudo is not None else [], dtype=torch.long)
    pseudo_class = torch.as_tensor(pseudo.classes if pseudo is not None else [], dtype=torch.long)
    labels = torch.cat([inputs.source_labels, pseudo_class])

    model.train()
    history: list[EpochRecord] = []
    for epoch in range(epochs):
        grl = config.grl.coefficient_at(epoch, epochs)
        optimizer.zero_grad()
        out = model(inputs, grl_coefficient=grl)
        logits = torch.cat([out.logits_source, out.logits_target[pseudo_index]])
        components = out.components
        components.cls = classifier_loss(
            logits, labels, out.private_hidden, out.laplacians, zeta=config.zeta
        )
        loss = objective(components, config)
        if not torch.isfinite(loss):
            raise TrainingError(f"non-finite loss {float(loss)}", phase=phase, step=epoch)
        loss.backward()
        optimizer.step()

        floats = components.to_floats()
        record = EpochRecord(
            phase=phase,
            epoch=epoch,
            grl_coefficient=grl,
            total=weighted_total(floats, config, phase),
            **floats,
        )
        history.append(record)
        logger.debug("phase %d epoch %d: %s", phase, epoch, record)
        if config.log_every and (epoch % config.log_every == 0 or epoch == epochs - 1):
            logger.info(
                "phase %d epoch %d/%d: total %.4f cls %.4f da %.4f",
                phase, epoch + 1, epochs, record.total, record.cls, record.da,
            )
    return history
