"""Single-file model checkpoints.

One ``torch.save`` payload holding a format tag, the package version, the
config and schema that produced the model, per-tensor shape headers and the
state dict. Loading rebuilds the model against a dataset and refuses a
dataset whose schema or sizes differ.
"""
from __future__ import annotations

import logging
import pickle
from pathlib import Path
from typing import Any

import torch

from gda_hin._version import __version__
from gda_hin.config import TrainConfig
from gda_hin.exceptions import LoadError, SchemaError
from gda_hin.hin.graph import DomainPair, TypeSchema
from gda_hin.training.model import ModelState

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "gda-hin-checkpoint/1"


def save_checkpoint(model: ModelState, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload: dict[str, Any] = {
        "format": CHECKPOINT_FORMAT,
        "version": __version__,
        "config": model.config.to_dict(),
        "schema": model.schema.to_dict(),
        "uses_private": model.uses_private,
        "shapes": model.tensor_shapes(),
        "state": model.state_dict(),
    }
    torch.save(payload, path)
    logger.info("wrote checkpoint %s (%d tensors)", path, len(payload["shapes"]))
    return path


def read_checkpoint(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, EOFError, pickle.UnpicklingError) as exc:
        raise LoadError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise LoadError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    return payload


def load_checkpoint(path: str | Path, pair: DomainPair) -> ModelState:
    """Rebuild the checkpointed model for ``pair``; SchemaError if they do not match."""
    payload = read_checkpoint(path)
    schema = TypeSchema.from_dict(payload["schema"])
    if schema != pair.schema:
        raise SchemaError(f"checkpoint schema {schema.to_dict()} does not match the dataset schema")
    config = TrainConfig.from_dict(payload["config"])
    model = ModelState.for_pair(pair, config)
    expected = model.tensor_shapes()
    if expected != payload["shapes"]:
        differing = sorted(
            name for name in set(expected) | set(payload["shapes"])
            if expected.get(name) != payload["shapes"].get(name)
        )
        raise SchemaError(f"checkpoint tensor shapes do not fit the dataset: {differing[:5]}")
    model.load_state_dict(payload["state"])
    model.uses_private = bool(payload["uses_private"])
    if payload["version"] != __version__:
        logger.warning("checkpoint written by gda-hin %s, running %s", payload["version"], __version__)
    return model
