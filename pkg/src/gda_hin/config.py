from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

from gda_hin.exceptions import ConfigError


class Ablation(StrEnum):
    FULL = "full"
    WO_P = "wo_P"      # no pairwise node-type alignment
    WO_T = "wo_T"      # no topological alignment
    W_S = "w_S"        # shared types only
    NO_DA = "no_da"    # extractor + classifier on source labels


class GrlSchedule(StrEnum):
    CONSTANT = "constant"
    RAMP = "ramp"


@dataclass
class GrlConfig:
    coefficient: float = 1.0
    schedule: GrlSchedule = GrlSchedule.RAMP
    gamma: float = 10.0
    max_step: int = 0    # 0 → ramp over the whole run

    def __post_init__(self) -> None:
        _require_finite(self, prefix="grl_")
        self.schedule = _enum(GrlSchedule, self.schedule, "grl_schedule")
        if self.coefficient < 0:
            raise ConfigError(f"grl_coefficient must be >= 0, got {self.coefficient}")
        if self.gamma <= 0:
            raise ConfigError(f"grl_gamma must be > 0, got {self.gamma}")
        if self.max_step < 0:
            raise ConfigError(f"grl_max_step must be >= 0, got {self.max_step}")

    def coefficient_at(self, step: int, total_steps: int) -> float:
        """Reversal coefficient λ for a training step.

        The ramp is ``2 / (1 + exp(-gamma * p)) - 1`` scaled by ``coefficient``,
        where p is training progress in [0, 1].
        """
        if self.schedule is GrlSchedule.CONSTANT:
            return self.coefficient
        horizon = self.max_step or total_steps
        progress = 1.0 if horizon <= 0 else min(max(step / horizon, 0.0), 1.0)
        return self.coefficient * (2.0 / (1.0 + math.exp(-self.gamma * progress)) - 1.0)


@dataclass
class TrainConfig:
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.1
    delta: float = 0.1
    zeta: float = 0.01
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    epochs_phase1: int = 200
    epochs_phase2: int = 200
    pseudo_threshold: float = 0.9
    pseudo_max_fraction: float = 0.3
    grl: GrlConfig = field(default_factory=GrlConfig)
    seed: int = 0
    ablation: Ablation = Ablation.FULL
    # architecture
    hidden_dim: int = 64
    disc_hidden: int = 32
    num_heads: int = 4
    num_layers: int = 2
    dropout: float = 0.1
    init_scale: float = 0.01
    activation: str = "gelu"
    warm_start: bool = True
    topo_all_types: bool = False
    dtype: str = "float32"
    log_every: int = 50

    def __post_init__(self) -> None:
        _require_finite(self)
        self.ablation = _enum(Ablation, self.ablation, "ablation")
        if isinstance(self.grl, dict):
            self.grl = GrlConfig(**self.grl)
        for name in ("alpha", "beta", "gamma", "zeta", "weight_decay", "init_scale"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.pseudo_threshold <= 1:
            raise ConfigError(f"pseudo_threshold must lie in (0, 1], got {self.pseudo_threshold}")
        if not 0 <= self.pseudo_max_fraction <= 1:
            raise ConfigError(
                f"pseudo_max_fraction must lie in [0, 1], got {self.pseudo_max_fraction}"
            )
        if self.epochs_phase1 < 0 or self.epochs_phase2 < 0:
            raise ConfigError("epoch counts must be >= 0")
        if self.hidden_dim <= 0 or self.num_heads <= 0 or self.hidden_dim % self.num_heads:
            raise ConfigError(
                f"hidden_dim ({self.hidden_dim}) must be a positive multiple of "
                f"num_heads ({self.num_heads})"
            )
        if self.num_layers < 0 or self.disc_hidden <= 0:
            raise ConfigError("num_layers must be >= 0 and disc_hidden > 0")
        if not 0 <= self.dropout < 1:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.activation not in ("gelu", "relu", "tanh", "identity"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")

    def effective(self) -> TrainConfig:
        """Copy with loss weights adjusted for the configured ablation."""
        if self.ablation is Ablation.WO_P:
            return dataclasses.replace(self, beta=0.0)
        if self.ablation is Ablation.WO_T:
            return dataclasses.replace(self, gamma=0.0)
        if self.ablation is Ablation.NO_DA:
            return dataclasses.replace(self, beta=0.0, gamma=0.0)
        return self

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["ablation"] = str(self.ablation)
        data["grl"]["schedule"] = str(self.grl.schedule)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainConfig:
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> TrainConfig:
        """Parse a flat ``key=value`` file; ``grl_*`` keys fill the nested GrlConfig."""
        values = read_key_value_file(path)
        grl_values = {k[len("grl_"):]: v for k, v in values.items() if k.startswith("grl_")}
        top_values = {k: v for k, v in values.items() if not k.startswith("grl_")}
        grl = GrlConfig(**_coerce_fields(GrlConfig, grl_values, prefix="grl_"))
        return cls(grl=grl, **_coerce_fields(cls, top_values, exclude=("grl",)))


@dataclass
class SyntheticConfig:
    """Parameters of the citation-shaped synthetic generator.

    Both domains share paper (P), author (A) and venue (V) types; the source
    has private term (T) nodes, the target private field (F) nodes. Authors
    carry the class labels.
    """

    classes: int = 4
    papers: int = 400
    authors: int = 300
    venues: int = 20
    source_private: int = 200
    target_private: int = 180
    dim_paper: int = 16
    dim_author: int = 16
    dim_venue: int = 8
    dim_source_private: int = 12
    dim_target_private: int = 10
    authors_per_paper: float = 2.0
    privates_per_paper: float = 3.0
    homophily: float = 0.8
    noise: float = 1.0
    separation: float = 1.0
    shift: float = 0.0
    density: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        _require_finite(self)
        for name in ("classes", "papers", "authors", "venues", "source_private",
                     "target_private", "dim_paper", "dim_author", "dim_venue",
                     "dim_source_private", "dim_target_private"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.authors_per_paper <= 0 or self.privates_per_paper <= 0:
            raise ConfigError("per-paper link rates must be positive")
        if not 0 <= self.homophily <= 1:
            raise ConfigError(f"homophily must lie in [0, 1], got {self.homophily}")
        if self.noise <= 0 or self.density <= 0:
            raise ConfigError("noise and density must be positive")
        if self.shift < 0 or self.separation < 0:
            raise ConfigError("shift and separation must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_file(cls, path: str | Path) -> SyntheticConfig:
        return cls(**_coerce_fields(cls, read_key_value_file(path)))


# ---------------------------------------------------------------------------
# key=value parsing
# ---------------------------------------------------------------------------

def read_key_value_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        values[key] = value
    return values


def _coerce_fields(
    cls: type,
    values: dict[str, str],
    *,
    prefix: str = "",
    exclude: tuple[str, ...] = (),
) -> dict[str, Any]:
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)} - set(exclude)
    coerced: dict[str, Any] = {}
    for key, raw in values.items():
        if key not in names:
            raise ConfigError(f"unknown config key {prefix + key!r}")
        coerced[key] = _coerce(raw, hints[key], prefix + key)
    return coerced


def _coerce(raw: str, typ: Any, key: str) -> Any:
    try:
        if typ is bool:
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if isinstance(typ, type) and issubclass(typ, StrEnum):
            return typ(raw)
        return raw
    except ValueError:
        raise ConfigError(f"invalid value for {key!r}: {raw!r}") from None


def _require_finite(config: Any, prefix: str = "") -> None:
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{prefix}{f.name} must be finite, got {value}")


def _enum(enum_cls: type[StrEnum], value: Any, key: str) -> Any:
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"invalid {key} {value!r} (expected one of: {allowed})") from None
