"""Run orchestration shared by the CLI commands: single runs and ablation sweeps."""
from __future__ import annotations

import dataclasses
import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from gda_hin.config import Ablation, SyntheticConfig, TrainConfig
from gda_hin.exceptions import ConfigError, ContractError, GdaHinError
from gda_hin.hin.graph import DomainPair
from gda_hin.hin.io import load_dataset
from gda_hin.hin.synthetic import generate_synthetic_pair
from gda_hin.report import RunReport
from gda_hin.training.trainer import PhaseResult, evaluate, train_phase1, train_phase2

logger = logging.getLogger(__name__)

PHASES = ("1", "2", "both")
THREADS_ENV = "GDA_HIN_THREADS"


@dataclass(frozen=True)
class DataSource:
    """Either a dataset directory or a synthetic generator config."""

    data_dir: Path | None = None
    synthetic: SyntheticConfig | None = None

    def __post_init__(self) -> None:
        if (self.data_dir is None) == (self.synthetic is None):
            raise ConfigError("exactly one of a dataset directory or a synthetic config is required")

    def load(self) -> DomainPair:
        if self.data_dir is not None:
            return load_dataset(self.data_dir)
        return generate_synthetic_pair(self.synthetic)


@dataclass
class RunOutcome:
    report: RunReport
    result: PhaseResult
    phase1: PhaseResult


def run(pair: DomainPair, config: TrainConfig, phase: str = "both") -> RunOutcome:
    """Train phase I and, unless ``phase == "1"``, phase II; report the final model.

    ``phase == "2"`` still trains phase I for its pseudo labels but reports
    only the phase II epochs.
    """
    if phase not in PHASES:
        raise ConfigError(f"phase must be one of {PHASES}, got {phase!r}")
    started = time.perf_counter()
    phase1 = train_phase1(pair, config)
    result = phase1 if phase == "1" else train_phase2(pair, phase1, config)
    if phase == "both" and result is not phase1:
        history = phase1.history + result.history
    else:
        history = result.history
    accuracy = evaluate(result.model, pair) if pair.held_out_labels is not None else None
    report = RunReport(
        history=history,
        accuracy=accuracy,
        pseudo_label_count=len(result.pseudo_labels),
        wall_seconds=time.perf_counter() - started,
        config=config.to_dict(),
        seed=config.seed,
        phase=phase,
    )
    if accuracy is not None:
        logger.info("%s seed %d: target accuracy %.4f", config.ablation, config.seed, accuracy)
    return RunOutcome(report=report, result=result, phase1=phase1)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    ablation: Ablation
    accuracies: list[float] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.accuracies) if self.accuracies else float("nan")

    @property
    def std(self) -> float:
        return statistics.pstdev(self.accuracies) if self.accuracies else float("nan")

    @property
    def median(self) -> float:
        return statistics.median(self.accuracies) if self.accuracies else float("nan")


def sweep_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if workers < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return workers


def run_cell(source: DataSource, config: TrainConfig) -> tuple[float | None, str | None]:
    """One (ablation, seed) cell; failures come back as a message instead of raising."""
    try:
        pair = source.load()
        if pair.held_out_labels is None:
            raise ContractError("sweeps need held-out target labels")
        return run(pair, config).report.accuracy, None
    except GdaHinError as exc:
        logger.warning("cell %s seed %d failed: %s", config.ablation, config.seed, exc)
        return None, f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        logger.exception("cell %s seed %d crashed", config.ablation, config.seed)
        return None, f"{type(exc).__name__}: {exc}"


def sweep(
    source: DataSource,
    base: TrainConfig,
    ablations: list[Ablation],
    seeds: list[int],
    workers: int | None = None,
) -> list[SweepRow]:
    """Run every (ablation, seed) cell, in worker processes when ``workers > 1``."""
    if not ablations or not seeds:
        raise ConfigError("a sweep needs at least one ablation and one seed")
    workers = min(workers or sweep_workers(), len(ablations) * len(seeds))
    cells = [(a, s, dataclasses.replace(base, ablation=a, seed=s)) for a in ablations for s in seeds]
    if workers == 1:
        outcomes = [run_cell(source, cfg) for _, _, cfg in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_cell, [source] * len(cells), [cfg for _, _, cfg in cells]))

    rows = {a: SweepRow(ablation=a) for a in ablations}
    for (ablation, seed, _), (accuracy, error) in zip(cells, outcomes):
        if error is None:
            rows[ablation].accuracies.append(accuracy)
        else:
            rows[ablation].failures.append(f"seed {seed}: {error}")
    return [rows[a] for a in ablations]
