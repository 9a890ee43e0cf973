from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Mapping

import numpy as np

from gda_hin.exceptions import SchemaError, ValidationError

TYPE_PAIR_SEPARATOR = "~"


class DomainTag(StrEnum):
    SOURCE = "source"
    TARGET = "target"


def relation_endpoints(relation: str) -> tuple[str, str]:
    """Split a ``<src_type>-<dst_type>`` relation name into its endpoint types."""
    parts = relation.split("-")
    if len(parts) != 2 or not all(parts):
        raise SchemaError(
            f"relation name {relation!r} must have the form <src_type>-<dst_type>"
        )
    return parts[0], parts[1]


def _as_matrix(x: Any) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


# ---------------------------------------------------------------------------
# HeteroGraph
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HeteroGraph:
    """One domain's typed multigraph.

    ``features[t]`` has one row per node of type ``t``; ``edges[r]`` is an
    ``(E, 2)`` integer array of local ``(src_index, dst_index)`` pairs for the
    relation ``r`` named ``<src_type>-<dst_type>``. ``labels`` is a dense class
    vector over the class-carrying type (source domain only).
    """

    domain_tag: DomainTag
    node_counts: Mapping[str, int]
    features: Mapping[str, np.ndarray]
    edges: Mapping[str, np.ndarray] = field(default_factory=dict)
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain_tag", DomainTag(self.domain_tag))
        object.__setattr__(self, "node_counts", {t: int(n) for t, n in self.node_counts.items()})
        object.__setattr__(
            self, "features", {t: _frozen(_as_matrix(x)) for t, x in self.features.items()}
        )
        object.__setattr__(
            self, "edges",
            {r: _frozen(np.asarray(e, dtype=np.int64).reshape(-1, 2)) for r, e in self.edges.items()},
        )
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(np.asarray(self.labels, dtype=np.int64)))
        self.validate()

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> None:
        if set(self.features) != set(self.node_counts):
            raise ValidationError(
                f"{self.domain_tag}: feature types {sorted(self.features)} do not match "
                f"node types {sorted(self.node_counts)}"
            )
        for node_type, x in self.features.items():
            if x.shape[0] != self.node_counts[node_type]:
                raise ValidationError(
                    f"{self.domain_tag}: type {node_type!r} has {x.shape[0]} feature rows "
                    f"but {self.node_counts[node_type]} nodes"
                )
        for relation, pairs in self.edges.items():
            src_type, dst_type = relation_endpoints(relation)
            for endpoint in (src_type, dst_type):
                if endpoint not in self.node_counts:
                    raise ValidationError(
                        f"{self.domain_tag}: relation {relation!r} references unknown type {endpoint!r}"
                    )
            for column, endpoint in ((0, src_type), (1, dst_type)):
                bad = np.flatnonzero((pairs[:, column] < 0) | (pairs[:, column] >= self.node_counts[endpoint]))
                if bad.size:
                    row = int(bad[0])
                    raise ValidationError(
                        f"{self.domain_tag}: relation {relation!r} edge #{row} "
                        f"({int(pairs[row, 0])}, {int(pairs[row, 1])}) has {endpoint!r} index "
                        f"out of range [0, {self.node_counts[endpoint]})"
                    )

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def node_types(self) -> list[str]:
        return list(self.node_counts)

    def feature_dim(self, node_type: str) -> int:
        return int(self.features[node_type].shape[1])

    def incident_relations(self, node_type: str) -> list[str]:
        return [r for r in self.edges if node_type in relation_endpoints(r)]

    def restrict(self, node_types: set[str] | list[str], relations: set[str] | list[str]) -> HeteroGraph:
        """Sub-graph with only the given types and relations; labels kept."""
        keep = [t for t in self.node_counts if t in set(node_types)]
        return HeteroGraph(
            domain_tag=self.domain_tag,
            node_counts={t: self.node_counts[t] for t in keep},
            features={t: self.features[t] for t in keep},
            edges={r: e for r, e in self.edges.items() if r in set(relations)},
            labels=self.labels,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeteroGraph):
            return NotImplemented
        return (
            self.domain_tag == other.domain_tag
            and dict(self.node_counts) == dict(other.node_counts)
            and self.features.keys() == other.features.keys()
            and all(np.array_equal(self.features[t], other.features[t]) for t in self.features)
            and self.edges.keys() == other.edges.keys()
            and all(np.array_equal(self.edges[r], other.edges[r]) for r in self.edges)
            and _optional_equal(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]


def _optional_equal(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


# ---------------------------------------------------------------------------
# TypeSchema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeSchema:
    shared_pairs: tuple[tuple[str, str], ...]
    private_pairs: tuple[tuple[str, str], ...] = ()
    relation_pairs: tuple[tuple[str, str], ...] = ()
    target_class_type: str = ""
    num_classes: int = 0

    def __post_init__(self) -> None:
        for name in ("shared_pairs", "private_pairs", "relation_pairs"):
            object.__setattr__(self, name, tuple(tuple(p) for p in getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if not self.shared_pairs:
            raise SchemaError("schema needs at least one shared type pair")
        if self.num_classes < 1:
            raise SchemaError(f"num_classes must be >= 1, got {self.num_classes}")
        pairs = self.shared_pairs + self.private_pairs
        for side, label in ((0, "source"), (1, "target")):
            names = [p[side] for p in pairs]
            dupes = sorted({n for n in names if names.count(n) > 1})
            if dupes:
                raise SchemaError(f"{label} types appear in more than one pair: {dupes}")
        if self.target_class_type not in {s for s, _ in self.shared_pairs}:
            raise SchemaError(
                f"target_type {self.target_class_type!r} must be a shared source type"
            )
        source_to_target = dict(pairs)
        for src_rel, tgt_rel in self.relation_pairs:
            src_ends = relation_endpoints(src_rel)
            tgt_ends = relation_endpoints(tgt_rel)
            mapped = tuple(source_to_target.get(t) for t in src_ends)
            if mapped != tgt_ends:
                raise SchemaError(
                    f"relation pair ({src_rel}, {tgt_rel}) is not consistent with the type pairing"
                )

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    @property
    def k1(self) -> int:
        return len(self.shared_pairs)

    @property
    def k2(self) -> int:
        return len(self.private_pairs)

    def types(self, domain: DomainTag, *, include_private: bool = True) -> list[str]:
        side = 0 if DomainTag(domain) is DomainTag.SOURCE else 1
        pairs = self.shared_pairs + (self.private_pairs if include_private else ())
        return [p[side] for p in pairs]

    def relations(self, domain: DomainTag) -> list[str]:
        side = 0 if DomainTag(domain) is DomainTag.SOURCE else 1
        return [p[side] for p in self.relation_pairs]

    def class_type(self, domain: DomainTag) -> str:
        if DomainTag(domain) is DomainTag.SOURCE:
            return self.target_class_type
        return dict(self.shared_pairs)[self.target_class_type]

    def type_key(self, domain: DomainTag, node_type: str) -> str:
        """Domain-independent parameter key of a node type (one key per pair)."""
        return _pair_key(self.shared_pairs + self.private_pairs, domain, node_type, "type")

    def relation_key(self, domain: DomainTag, relation: str) -> str:
        return _pair_key(self.relation_pairs, domain, relation, "relation")

    def is_private(self, domain: DomainTag, node_type: str) -> bool:
        side = 0 if DomainTag(domain) is DomainTag.SOURCE else 1
        return node_type in {p[side] for p in self.private_pairs}

    def without_private(self) -> TypeSchema:
        shared = {s for s, _ in self.shared_pairs}
        relations = tuple(
            p for p in self.relation_pairs if set(relation_endpoints(p[0])) <= shared
        )
        return TypeSchema(
            shared_pairs=self.shared_pairs,
            private_pairs=(),
            relation_pairs=relations,
            target_class_type=self.target_class_type,
            num_classes=self.num_classes,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "shared_pairs": [list(p) for p in self.shared_pairs],
            "private_pairs": [list(p) for p in self.private_pairs],
            "relation_pairs": [list(p) for p in self.relation_pairs],
            "target_class_type": self.target_class_type,
            "num_classes": self.num_classes,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TypeSchema:
        return cls(
            shared_pairs=tuple(tuple(p) for p in data["shared_pairs"]),
            private_pairs=tuple(tuple(p) for p in data["private_pairs"]),
            relation_pairs=tuple(tuple(p) for p in data["relation_pairs"]),
            target_class_type=data["target_class_type"],
            num_classes=int(data["num_classes"]),
        )


def _pair_key(pairs: tuple[tuple[str, str], ...], domain: DomainTag, name: str, what: str) -> str:
    side = 0 if DomainTag(domain) is DomainTag.SOURCE else 1
    for pair in pairs:
        if pair[side] == name:
            src, tgt = pair
            return src if src == tgt else f"{src}{TYPE_PAIR_SEPARATOR}{tgt}"
    raise SchemaError(f"{domain} {what} {name!r} is not paired in the schema")


# ---------------------------------------------------------------------------
# DomainPair
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DomainPair:
    """Source/target graphs plus their type pairing.

    ``held_out_labels`` are the target domain's class ids; only evaluation
    code reads them.
    """

    source: HeteroGraph
    target: HeteroGraph
    schema: TypeSchema
    held_out_labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.held_out_labels is not None:
            object.__setattr__(
                self, "held_out_labels", _frozen(np.asarray(self.held_out_labels, dtype=np.int64))
            )
        self.validate()

    def validate(self) -> None:
        if self.source.domain_tag is not DomainTag.SOURCE:
            raise SchemaError("source graph is not tagged as source")
        if self.target.domain_tag is not DomainTag.TARGET:
            raise SchemaError("target graph is not tagged as target")
        if self.target.labels is not None:
            raise SchemaError("target graph must not carry training labels")
        schema = self.schema
        for domain, graph in ((DomainTag.SOURCE, self.source), (DomainTag.TARGET, self.target)):
            expected = set(schema.types(domain))
            if set(graph.node_types) != expected:
                raise SchemaError(
                    f"{domain} types {sorted(graph.node_types)} do not match schema {sorted(expected)}"
                )
            unpaired = set(graph.edges) - set(schema.relations(domain))
            if unpaired:
                raise SchemaError(f"{domain} relations not paired in the schema: {sorted(unpaired)}")
        for src_type, tgt_type in schema.shared_pairs:
            d_s, d_t = self.source.feature_dim(src_type), self.target.feature_dim(tgt_type)
            if d_s != d_t:
                raise SchemaError(
                    f"shared pair ({src_type}, {tgt_type}) has feature dims {d_s} != {d_t}"
                )
        num_source_class = self.source.node_counts[schema.class_type(DomainTag.SOURCE)]
        num_target_class = self.target.node_counts[schema.class_type(DomainTag.TARGET)]
        labels = self.source.labels
        if labels is None or labels.shape != (num_source_class,):
            raise SchemaError(
                f"source labels must cover all {num_source_class} "
                f"{schema.target_class_type!r} nodes"
            )
        _check_label_range(labels, schema.num_classes, "source")
        if self.held_out_labels is not None:
            if self.held_out_labels.shape != (num_target_class,):
                raise SchemaError(
                    f"target labels must cover all {num_target_class} "
                    f"{schema.class_type(DomainTag.TARGET)!r} nodes"
                )
            _check_label_range(self.held_out_labels, schema.num_classes, "target")

    def graph(self, domain: DomainTag) -> HeteroGraph:
        return self.source if DomainTag(domain) is DomainTag.SOURCE else self.target

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DomainPair):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.source == other.source
            and self.target == other.target
            and _optional_equal(self.held_out_labels, other.held_out_labels)
        )

    __hash__ = None  # type: ignore[assignment]


def _check_label_range(labels: np.ndarray, num_classes: int, domain: str) -> None:
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValidationError(f"{domain} labels must lie in [0, {num_classes})")


def restrict_to_shared(pair: DomainPair) -> DomainPair:
    """Drop private types and every relation touching them."""
    if not pair.schema.private_pairs:
        return pair
    schema = pair.schema.without_private()
    source = pair.source.restrict(schema.types(DomainTag.SOURCE), schema.relations(DomainTag.SOURCE))
    target = pair.target.restrict(schema.types(DomainTag.TARGET), schema.relations(DomainTag.TARGET))
    return DomainPair(source=source, target=target, schema=schema, held_out_labels=pair.held_out_labels)
