from gda_hin._version import __version__
from gda_hin.config import Ablation, GrlConfig, GrlSchedule, SyntheticConfig, TrainConfig
from gda_hin.exceptions import (
    ConfigError,
    ContractError,
    GdaHinError,
    IsolatedPrivateTypeWarning,
    LoadError,
    SchemaError,
    TrainingError,
    ValidationError,
)
from gda_hin.hin import (
    DomainPair,
    DomainTag,
    HeteroGraph,
    TypeSchema,
    generate_synthetic_pair,
    load_dataset,
    restrict_to_shared,
    save_dataset,
)
from gda_hin.report import RunReport
from gda_hin.runner import DataSource, RunOutcome, run, sweep
from gda_hin.training import (
    ModelState,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train_phase1,
    train_phase2,
)

__all__ = [
    "__version__",
    "Ablation",
    "ConfigError",
    "ContractError",
    "DataSource",
    "DomainPair",
    "DomainTag",
    "GdaHinError",
    "GrlConfig",
    "GrlSchedule",
    "HeteroGraph",
    "IsolatedPrivateTypeWarning",
    "LoadError",
    "ModelState",
    "RunOutcome",
    "RunReport",
    "SchemaError",
    "SyntheticConfig",
    "TrainConfig",
    "TrainingError",
    "TypeSchema",
    "ValidationError",
    "evaluate",
    "generate_synthetic_pair",
    "load_checkpoint",
    "load_dataset",
    "restrict_to_shared",
    "run",
    "save_checkpoint",
    "save_dataset",
    "sweep",
    "train_phase1",
    "train_phase2",
]
