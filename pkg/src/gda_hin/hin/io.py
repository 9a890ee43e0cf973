"""Dataset directory reader/writer.

Layout (UTF-8, tab-separated)::

    schema.tsv                   shared/private/relation/target_type/classes rows
    <domain>/<type>.nodes.tsv    one row of float features per node
    <domain>/<relation>.edges.tsv  src_index <TAB> dst_index
    <domain>/labels.tsv          node_index <TAB> class_id

``<domain>`` is ``source`` or ``target``. The target's labels file is only
read into ``DomainPair.held_out_labels`` for evaluation.
"""
from __future__ import annotations

import logging
import warnings
from pathlib import Path

import numpy as np

from gda_hin.exceptions import LoadError, SchemaError, ValidationError
from gda_hin.hin.graph import DomainPair, DomainTag, HeteroGraph, TypeSchema

logger = logging.getLogger(__name__)

SCHEMA_FILE = "schema.tsv"
LABELS_FILE = "labels.tsv"


def load_dataset(root_path: str | Path) -> DomainPair:
    """Read and validate a dataset directory into a DomainPair."""
    root = Path(root_path)
    schema = read_schema(root / SCHEMA_FILE)
    graphs: dict[DomainTag, HeteroGraph] = {}
    labels: dict[DomainTag, np.ndarray | None] = {}
    for domain in DomainTag:
        domain_dir = root / domain.value
        features = {t: _read_features(domain_dir / f"{t}.nodes.tsv") for t in schema.types(domain)}
        edges = {r: _read_edges(domain_dir / f"{r}.edges.tsv") for r in schema.relations(domain)}
        class_type = schema.class_type(domain)
        labels_path = domain_dir / LABELS_FILE
        if domain is DomainTag.SOURCE or labels_path.exists():
            labels[domain] = _read_labels(labels_path, features[class_type].shape[0], domain)
        else:
            labels[domain] = None
        graphs[domain] = HeteroGraph(
            domain_tag=domain,
            node_counts={t: x.shape[0] for t, x in features.items()},
            features=features,
            edges=edges,
            labels=labels[domain] if domain is DomainTag.SOURCE else None,
        )
        logger.info(
            "loaded %s graph: nodes %s, edges %s",
            domain.value,
            graphs[domain].node_counts,
            {r: len(e) for r, e in edges.items()},
        )

    held_out = labels[DomainTag.TARGET]
    source_labels = labels[DomainTag.SOURCE]
    if held_out is not None and source_labels is not None:
        if set(np.unique(source_labels)) != set(np.unique(held_out)):
            raise SchemaError(
                f"class sets differ between domains: source {sorted(set(source_labels.tolist()))}, "
                f"target {sorted(set(held_out.tolist()))}"
            )
    return DomainPair(
        source=graphs[DomainTag.SOURCE],
        target=graphs[DomainTag.TARGET],
        schema=schema,
        held_out_labels=held_out,
    )


def save_dataset(pair: DomainPair, root_path: str | Path) -> Path:
    """Write a DomainPair in the layout ``load_dataset`` reads."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    (root / SCHEMA_FILE).write_text(format_schema(pair.schema), encoding="utf-8")
    for domain in DomainTag:
        graph = pair.graph(domain)
        domain_dir = root / domain.value
        domain_dir.mkdir(parents=True, exist_ok=True)
        for node_type, x in graph.features.items():
            np.savetxt(domain_dir / f"{node_type}.nodes.tsv", x, fmt="%.17g", delimiter="\t")
        for relation, pairs in graph.edges.items():
            np.savetxt(domain_dir / f"{relation}.edges.tsv", pairs, fmt="%d", delimiter="\t")
        labels = graph.labels if domain is DomainTag.SOURCE else pair.held_out_labels
        if labels is not None:
            rows = np.column_stack([np.arange(len(labels)), labels])
            np.savetxt(domain_dir / LABELS_FILE, rows, fmt="%d", delimiter="\t")
    return root


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

def read_schema(path: Path) -> TypeSchema:
    text = _read_text(path)
    shared: list[tuple[str, str]] = []
    private: list[tuple[str, str]] = []
    relations: list[tuple[str, str]] = []
    target_type = ""
    classes = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = raw.strip().split("\t")
        kind, args = cols[0], cols[1:]
        try:
            if kind in ("shared", "private", "relation"):
                (a, b) = args
                {"shared": shared, "private": private, "relation": relations}[kind].append((a, b))
            elif kind == "target_type":
                (target_type,) = args
            elif kind == "classes":
                (value,) = args
                classes = int(value)
            else:
                raise SchemaError(f"{path}:{lineno}: unknown row kind {kind!r}")
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: malformed {kind!r} row: {raw!r}") from None
    return TypeSchema(
        shared_pairs=tuple(shared),
        private_pairs=tuple(private),
        relation_pairs=tuple(relations),
        target_class_type=target_type,
        num_classes=classes,
    )


def format_schema(schema: TypeSchema) -> str:
    rows = [f"shared\t{s}\t{t}" for s, t in schema.shared_pairs]
    rows += [f"private\t{s}\t{t}" for s, t in schema.private_pairs]
    rows += [f"relation\t{s}\t{t}" for s, t in schema.relation_pairs]
    rows += [f"target_type\t{schema.target_class_type}", f"classes\t{schema.num_classes}"]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# File helpers
# ---------------------------------------------------------------------------

def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise LoadError(f"missing dataset file: {path}") from None
    except OSError as exc:
        raise LoadError(f"cannot read dataset file {path}: {exc}") from exc


def _load_table(path: Path, dtype: type) -> np.ndarray | None:
    text = _read_text(path)
    if not text.strip():
        return None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return np.loadtxt(path, delimiter="\t", dtype=dtype, ndmin=2)
    except ValueError as exc:
        raise LoadError(f"malformed dataset file {path}: {exc}") from exc


def _read_features(path: Path) -> np.ndarray:
    table = _load_table(path, np.float64)
    return np.zeros((0, 0)) if table is None else table


def _read_edges(path: Path) -> np.ndarray:
    table = _load_table(path, np.int64)
    if table is None:
        return np.zeros((0, 2), dtype=np.int64)
    if table.shape[1] != 2:
        raise LoadError(f"{path}: edge rows need exactly 2 columns, got {table.shape[1]}")
    return table


def _read_labels(path: Path, num_nodes: int, domain: DomainTag) -> np.ndarray:
    table = _load_table(path, np.int64)
    table = np.zeros((0, 2), dtype=np.int64) if table is None else table
    if table.shape[1] != 2:
        raise LoadError(f"{path}: label rows need exactly 2 columns, got {table.shape[1]}")
    labels = np.full(num_nodes, -1, dtype=np.int64)
    index, classes = table[:, 0], table[:, 1]
    if index.size and (index.min() < 0 or index.max() >= num_nodes):
        raise ValidationError(f"{path}: label node index out of range [0, {num_nodes})")
    labels[index] = classes
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise ValidationError(
            f"{path}: {missing.size} {domain.value} nodes have no label (first: {int(missing[0])})"
        )
    return labels
