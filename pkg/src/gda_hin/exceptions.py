class GdaHinError(Exception):
    """Base exception for gda_hin."""


class LoadError(GdaHinError):
    """Raised when a dataset file is missing or unreadable."""


class ValidationError(GdaHinError):
    """Raised when loaded or generated data violates a graph invariant."""


class SchemaError(GdaHinError):
    """Raised when type pairing, feature dimensions or a checkpoint schema do not line up."""


class ConfigError(GdaHinError):
    """Raised for invalid hyperparameters or config file contents."""


class ContractError(GdaHinError):
    """Raised when a caller violates an operation's pre-condition."""


class TrainingError(GdaHinError):
    """Raised when a training objective becomes non-finite."""

    def __init__(self, message: str, *, phase: int, step: int) -> None:
        super().__init__(f"phase {phase}, step {step}: {message}")
        self.phase = phase
        self.step = step


class IsolatedPrivateTypeWarning(UserWarning):
    """Raised when a private node type has no incident relations in one domain."""
