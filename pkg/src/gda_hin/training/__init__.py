from gda_hin.training.checkpoint import load_checkpoint, save_checkpoint
from gda_hin.training.losses import LossComponents, classifier_loss, phase1_loss, phase2_loss
from gda_hin.training.model import ModelState, PairInputs
from gda_hin.training.pseudo import PseudoLabelSet, select_pseudo_labels
from gda_hin.training.trainer import (
    EpochRecord,
    PhaseResult,
    accuracy,
    class_embeddings,
    confusion_matrix,
    evaluate,
    predict_proba,
    train_phase1,
    train_phase2,
)

__all__ = [
    "EpochRecord",
    "LossComponents",
    "ModelState",
    "PairInputs",
    "PhaseResult",
    "PseudoLabelSet",
    "accuracy",
    "class_embeddings",
    "classifier_loss",
    "confusion_matrix",
    "evaluate",
    "load_checkpoint",
    "phase1_loss",
    "phase2_loss",
    "predict_proba",
    "save_checkpoint",
    "select_pseudo_labels",
    "train_phase1",
    "train_phase2",
]
