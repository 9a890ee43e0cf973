"""gda-hin command line.

Usage:
    gda-hin generate-synthetic --out data/syn [--synthetic syn.txt] [--seed N]
    gda-hin train (--data DIR | --synthetic FILE) --out runs/a [--config tc.txt]
                  [--seed N] [--ablation full|wo_P|wo_T|w_S|no_da] [--phase 1|2|both]
    gda-hin evaluate --checkpoint runs/a/checkpoint.pt (--data DIR | --synthetic FILE)
    gda-hin export-embeddings --checkpoint CKPT (--data DIR | --synthetic FILE) --out emb.tsv
    gda-hin sweep (--data DIR | --synthetic FILE) --out runs/sweep
                  [--ablations full,wo_P,wo_T,w_S] [--seeds 0,1,2,3,4]

Results go to stdout, logs to stderr. Exit codes: 0 ok, 1 I/O failure,
2 invalid config/schema/dataset, 3 training divergence, 4 every sweep cell failed.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from gda_hin._version import __version__
from gda_hin.config import Ablation, SyntheticConfig, TrainConfig
from gda_hin.exceptions import (
    ConfigError,
    ContractError,
    LoadError,
    SchemaError,
    TrainingError,
    ValidationError,
)
from gda_hin.hin.graph import DomainPair, DomainTag
from gda_hin.hin.io import save_dataset
from gda_hin.hin.synthetic import generate_synthetic_pair
from gda_hin.runner import PHASES, DataSource, run, sweep
from gda_hin.training.checkpoint import load_checkpoint, save_checkpoint
from gda_hin.training.trainer import accuracy, class_embeddings, confusion_matrix, predict_proba

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_DIVERGED, EXIT_SWEEP_FAILED = 0, 1, 2, 3, 4
CHECKPOINT_FILE = "checkpoint.pt"
CONFUSION_FILE = "confusion.tsv"
SWEEP_FILE = "sweep.tsv"
DEFAULT_ABLATIONS = "full,wo_P,wo_T,w_S"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate_synthetic(args: argparse.Namespace) -> int:
    config = SyntheticConfig.from_file(args.synthetic) if args.synthetic else SyntheticConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    pair = generate_synthetic_pair(config)
    save_dataset(pair, args.out)
    print(f"wrote synthetic pair to {args.out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    pair = _data_source(args).load()
    config = _train_config(args)
    outcome = run(pair, config, phase=args.phase)
    out = outcome.report.write(args.out)
    save_checkpoint(outcome.result.model, out / CHECKPOINT_FILE)
    if outcome.report.accuracy is not None:
        print(f"accuracy: {outcome.report.accuracy * 100:.2f}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    pair = _data_source(args).load()
    if pair.held_out_labels is None:
        raise ContractError("the dataset has no target labels to evaluate against")
    model = load_checkpoint(args.checkpoint, pair)
    predictions = predict_proba(model, pair).argmax(axis=1)
    acc = accuracy(predictions, pair.held_out_labels)
    matrix = confusion_matrix(predictions, pair.held_out_labels, pair.schema.num_classes)
    out_dir = Path(args.out) if args.out else Path(args.checkpoint).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / CONFUSION_FILE).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["true\\predicted", *range(pair.schema.num_classes)])
        for label, row in enumerate(matrix):
            writer.writerow([label, *row.tolist()])
    print(f"accuracy: {acc * 100:.2f}")
    return EXIT_OK


def cmd_export_embeddings(args: argparse.Namespace) -> int:
    pair = _data_source(args).load()
    model = load_checkpoint(args.checkpoint, pair)
    write_embeddings(pair, class_embeddings(model, pair), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    source = _data_source(args)
    base = _train_config(args)
    ablations = [_ablation(name) for name in args.ablations.split(",") if name.strip()]
    seeds = _int_list(args.seeds, "--seeds")
    rows = sweep(source, base, ablations, seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["ablation\tn\tmean\tstd\tmedian\tfailures"]
    for row in rows:
        lines.append(
            f"{row.ablation}\t{len(row.accuracies)}\t{row.mean:.4f}\t{row.std:.4f}\t"
            f"{row.median:.4f}\t{len(row.failures)}"
        )
        for failure in row.failures:
            print(f"  [warn] {row.ablation} {failure}", file=sys.stderr)
    table = "\n".join(lines) + "\n"
    (out / SWEEP_FILE).write_text(table, encoding="utf-8")
    print(table, end="")
    if not any(row.accuracies for row in rows):
        print("every sweep cell failed", file=sys.stderr)
        return EXIT_SWEEP_FAILED
    return EXIT_OK


def write_embeddings(pair: DomainPair, embeddings: dict[DomainTag, np.ndarray], path: str | Path) -> None:
    """Rows ``domain  type  node_index  v1 .. v_dh`` for the class-type nodes of both domains."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for domain in DomainTag:
            node_type = pair.schema.class_type(domain)
            for index, vector in enumerate(embeddings[domain]):
                writer.writerow([domain.value, node_type, index, *(repr(float(v)) for v in vector)])


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _data_source(args: argparse.Namespace) -> DataSource:
    if args.data:
        return DataSource(data_dir=Path(args.data))
    return DataSource(synthetic=SyntheticConfig.from_file(args.synthetic))


def _train_config(args: argparse.Namespace) -> TrainConfig:
    config = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "ablation", None):
        overrides["ablation"] = _ablation(args.ablation)
    return dataclasses.replace(config, **overrides) if overrides else config


def _ablation(name: str) -> Ablation:
    try:
        return Ablation(name.strip())
    except ValueError:
        allowed = ", ".join(a.value for a in Ablation)
        raise ConfigError(f"unknown ablation {name!r} (expected one of: {allowed})") from None


def _int_list(raw: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{flag} takes comma-separated integers, got {raw!r}") from None


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--data", metavar="DIR", help="dataset directory")
    group.add_argument("--synthetic", metavar="FILE", help="synthetic generator config (key=value)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gda-hin",
        description="Domain adaptation across heterogeneous information networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-synthetic", help="write a synthetic domain pair")
    gen.add_argument("--synthetic", metavar="FILE", help="generator config (defaults apply if omitted)")
    gen.add_argument("--seed", type=int, help="override the generator seed")
    gen.add_argument("--out", required=True, metavar="DIR")
    gen.set_defaults(func=cmd_generate_synthetic)

    train = sub.add_parser("train", help="train and write report + checkpoint")
    _add_data_flags(train)
    train.add_argument("--config", metavar="FILE", help="TrainConfig key=value file")
    train.add_argument("--out", required=True, metavar="DIR")
    train.add_argument("--seed", type=int)
    train.add_argument("--ablation", help="full, wo_P, wo_T, w_S or no_da")
    train.add_argument("--phase", choices=PHASES, default="both")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="target accuracy and confusion counts of a checkpoint")
    _add_data_flags(ev)
    ev.add_argument("--checkpoint", required=True, metavar="FILE")
    ev.add_argument("--out", metavar="DIR", help="confusion.tsv directory (default: beside the checkpoint)")
    ev.set_defaults(func=cmd_evaluate)

    export = sub.add_parser("export-embeddings", help="class-type embeddings of both domains as TSV")
    _add_data_flags(export)
    export.add_argument("--checkpoint", required=True, metavar="FILE")
    export.add_argument("--out", required=True, metavar="FILE")
    export.set_defaults(func=cmd_export_embeddings)

    sw = sub.add_parser("sweep", help="accuracy table over ablations x seeds")
    _add_data_flags(sw)
    sw.add_argument("--config", metavar="FILE")
    sw.add_argument("--out", required=True, metavar="DIR")
    sw.add_argument("--ablations", default=DEFAULT_ABLATIONS)
    sw.add_argument("--seeds", default="0,1,2,3,4")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except TrainingError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, SchemaError, ValidationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LoadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
