from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from gda_hin._version import __version__
from gda_hin.training.trainer import EpochRecord

REPORT_FILE = "report.tsv"
SUMMARY_FILE = "run.json"
REPORT_COLUMNS = [f.name for f in fields(EpochRecord)]


@dataclass
class RunReport:
    history: list[EpochRecord] = field(default_factory=list)
    accuracy: float | None = None
    pseudo_label_count: int = 0
    wall_seconds: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    phase: str = "both"

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def write(self, out_dir: str | Path) -> Path:
        """Write ``report.tsv`` (one row per epoch) and ``run.json`` into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / REPORT_FILE).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for record in self.history:
                writer.writerow(_format(getattr(record, name)) for name in REPORT_COLUMNS)
        (out / SUMMARY_FILE).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": __version__,
            "phase": self.phase,
            "seed": self.seed,
            "accuracy": self.accuracy,
            "pseudo_label_count": self.pseudo_label_count,
            "wall_seconds": self.wall_seconds,
            "epochs": len(self.history),
            "final": asdict(self.history[-1]) if self.history else None,
            "config": self.config,
        }


def _format(value: Any) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def read_report(path: str | Path) -> list[EpochRecord]:
    """Parse a ``report.tsv`` back into epoch records."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    return [
        EpochRecord(
            phase=int(row["phase"]),
            epoch=int(row["epoch"]),
            **{name: float(row[name]) for name in REPORT_COLUMNS if name not in ("phase", "epoch")},
        )
        for row in rows
    ]


def read_summary(out_dir: str | Path) -> dict[str, Any]:
    return json.loads((Path(out_dir) / SUMMARY_FILE).read_text(encoding="utf-8"))
