"""Confidence-thresholded pseudo labels for the target domain."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from gda_hin.config import TrainConfig
from gda_hin.exceptions import ContractError

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class PseudoLabelSet:
    """Selected target nodes, ordered by node index."""

    indices: np.ndarray
    classes: np.ndarray
    confidences: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def class_counts(self, num_classes: int) -> np.ndarray:
        return np.bincount(self.classes, minlength=num_classes)

    @classmethod
    def empty(cls) -> PseudoLabelSet:
        return cls(
            indices=np.zeros(0, dtype=np.int64),
            classes=np.zeros(0, dtype=np.int64),
            confidences=np.zeros(0, dtype=np.float64),
        )


def class_caps(predicted: np.ndarray, num_classes: int, max_fraction: float) -> np.ndarray:
    """Per-class admission caps: ``floor(max_fraction × #nodes predicted as that class)``."""
    sizes = np.bincount(predicted, minlength=num_classes)
    return np.array([math.floor(max_fraction * s + 1e-12) for s in sizes], dtype=np.int64)


def select_pseudo_labels(probabilities: np.ndarray, config: TrainConfig) -> PseudoLabelSet:
    """Admit target nodes whose top class probability reaches ``pseudo_threshold``.

    Candidates are visited by confidence descending, node index ascending on
    ties, and each predicted class admits at most ``class_caps`` nodes.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim != 2:
        raise ContractError(f"expected an (N, C) probability matrix, got shape {probs.shape}")
    if probs.shape[0] == 0:
        return PseudoLabelSet.empty()
    row_sums = probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE):
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        raise ContractError(f"probability row {worst} sums to {row_sums[worst]!r}, not 1")

    predicted = probs.argmax(axis=1)
    confidence = probs[np.arange(probs.shape[0]), predicted]
    caps = class_caps(predicted, probs.shape[1], config.pseudo_max_fraction)

    candidates = np.flatnonzero(confidence >= config.pseudo_threshold)
    order = candidates[np.lexsort((candidates, -confidence[candidates]))]
    taken = np.zeros(probs.shape[1], dtype=np.int64)
    chosen: list[int] = []
    for node in order:
        label = predicted[node]
        if taken[label] < caps[label]:
            taken[label] += 1
            chosen.append(int(node))

    indices = np.sort(np.asarray(chosen, dtype=np.int64))
    selected = PseudoLabelSet(
        indices=indices,
        classes=predicted[indices].astype(np.int64),
        confidences=confidence[indices],
    )
    logger.info(
        "selected %d pseudo labels of %d target nodes (%d above threshold %.3f)",
        len(selected), probs.shape[0], candidates.size, config.pseudo_threshold,
    )
    return selected
