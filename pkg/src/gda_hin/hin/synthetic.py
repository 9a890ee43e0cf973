"""Citation-shaped synthetic domain pairs with controllable feature and structure shift."""
from __future__ import annotations

import logging

import numpy as np

from gda_hin.config import SyntheticConfig
from gda_hin.hin.graph import DomainPair, DomainTag, HeteroGraph, TypeSchema

logger = logging.getLogger(__name__)

PAPER, AUTHOR, VENUE = "P", "A", "V"
SOURCE_PRIVATE, TARGET_PRIVATE = "T", "F"


def synthetic_schema(config: SyntheticConfig) -> TypeSchema:
    return TypeSchema(
        shared_pairs=((PAPER, PAPER), (AUTHOR, AUTHOR), (VENUE, VENUE)),
        private_pairs=((SOURCE_PRIVATE, TARGET_PRIVATE),),
        relation_pairs=(
            (f"{PAPER}-{AUTHOR}", f"{PAPER}-{AUTHOR}"),
            (f"{PAPER}-{VENUE}", f"{PAPER}-{VENUE}"),
            (f"{PAPER}-{SOURCE_PRIVATE}", f"{PAPER}-{TARGET_PRIVATE}"),
        ),
        target_class_type=AUTHOR,
        num_classes=config.classes,
    )


def generate_synthetic_pair(config: SyntheticConfig, seed: int | None = None) -> DomainPair:
    """Draw a source/target pair from class-conditioned Gaussian mixtures.

    Target feature means are translated by ``config.shift`` along a fixed
    unit direction per type. The direction lies in the span of the centred
    class means, so the shift pushes target nodes across class boundaries.
    Target paper→author / paper→private link rates are scaled by
    ``config.density``. Deterministic in ``seed``
    (``config.seed`` when omitted).
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    c = config.classes
    dims = {
        PAPER: config.dim_paper,
        AUTHOR: config.dim_author,
        VENUE: config.dim_venue,
        SOURCE_PRIVATE: config.dim_source_private,
        TARGET_PRIVATE: config.dim_target_private,
    }
    centers = {t: rng.normal(0.0, config.separation, size=(c, d)) for t, d in dims.items()}
    directions = {t: _shift_direction(centers[t], rng.normal(size=d)) for t, d in dims.items()}

    graphs: dict[DomainTag, HeteroGraph] = {}
    author_labels: dict[DomainTag, np.ndarray] = {}
    for domain in DomainTag:
        is_target = domain is DomainTag.TARGET
        private_type = TARGET_PRIVATE if is_target else SOURCE_PRIVATE
        counts = {
            PAPER: config.papers,
            AUTHOR: config.authors,
            VENUE: config.venues,
            private_type: config.target_private if is_target else config.source_private,
        }
        classes = {
            PAPER: rng.integers(c, size=config.papers),
            AUTHOR: rng.permutation(np.arange(config.authors) % c),
            VENUE: np.arange(config.venues) % c,
            private_type: rng.permutation(np.arange(counts[private_type]) % c),
        }
        offset = config.shift if is_target else 0.0
        features = {
            t: centers[t][classes[t]] + offset * directions[t]
            + rng.normal(0.0, config.noise, size=(counts[t], dims[t]))
            for t in counts
        }
        density = config.density if is_target else 1.0
        paper_classes = classes[PAPER]
        edges = {
            f"{PAPER}-{VENUE}": _link(
                rng, paper_classes, classes[VENUE],
                np.ones(config.papers, dtype=np.int64),
                config.homophily,
            ),
            f"{PAPER}-{AUTHOR}": _link(
                rng, paper_classes, classes[AUTHOR],
                np.maximum(1, rng.poisson(config.authors_per_paper * density, size=config.papers)),
                config.homophily,
            ),
            f"{PAPER}-{private_type}": _link(
                rng, paper_classes, classes[private_type],
                rng.poisson(config.privates_per_paper * density, size=config.papers),
                config.homophily,
            ),
        }
        author_labels[domain] = classes[AUTHOR]
        graphs[domain] = HeteroGraph(
            domain_tag=domain,
            node_counts=counts,
            features=features,
            edges=edges,
            labels=None if is_target else classes[AUTHOR],
        )
        logger.debug(
            "synthetic %s graph: edges %s",
            domain.value, {r: len(e) for r, e in edges.items()},
        )

    return DomainPair(
        source=graphs[DomainTag.SOURCE],
        target=graphs[DomainTag.TARGET],
        schema=synthetic_schema(config),
        held_out_labels=author_labels[DomainTag.TARGET],
    )


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _shift_direction(centers: np.ndarray, draw: np.ndarray) -> np.ndarray:
    """Project ``draw`` onto the span of the centred class means.

    Falls back to ``draw`` itself when the means do not span anything
    (one class, or zero separation).
    """
    centred = centers - centers.mean(axis=0)
    basis, singular, _ = np.linalg.svd(centred.T, full_matrices=False)
    basis = basis[:, singular > 1e-9]
    projected = basis @ (basis.T @ draw)
    if np.linalg.norm(projected) < 1e-9 * np.linalg.norm(draw):
        return _unit(draw)
    return _unit(projected)


def _link(
    rng: np.random.Generator,
    paper_classes: np.ndarray,
    neighbour_classes: np.ndarray,
    degrees: np.ndarray,
    homophily: float,
) -> np.ndarray:
    """Link each paper to ``degrees[p]`` distinct neighbours, same-class with prob. ``homophily``."""
    num_neighbours = len(neighbour_classes)
    by_class = [np.flatnonzero(neighbour_classes == k) for k in range(paper_classes.max(initial=0) + 1)]
    rows: list[tuple[int, int]] = []
    for paper, (klass, degree) in enumerate(zip(paper_classes, degrees)):
        chosen: set[int] = set()
        for _ in range(min(int(degree), num_neighbours)):
            pool = by_class[klass] if klass < len(by_class) else np.empty(0, dtype=np.int64)
            if pool.size == 0 or rng.random() >= homophily:
                pool = np.arange(num_neighbours)
            candidates = np.setdiff1d(pool, list(chosen), assume_unique=True)
            if candidates.size == 0:
                candidates = np.setdiff1d(np.arange(num_neighbours), list(chosen), assume_unique=True)
            chosen.add(int(rng.choice(candidates)))
        rows.extend((paper, n) for n in sorted(chosen))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)
