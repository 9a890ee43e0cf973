import numpy as np
import pytest

from gda_hin.config import SyntheticConfig
from gda_hin.hin.graph import DomainTag
from gda_hin.hin.synthetic import generate_synthetic_pair


def _mean_gap(pair, node_type: str) -> tuple[float, float]:
    """Norm of the target-minus-source mean vector and its standard error."""
    xs, xt = pair.source.features[node_type], pair.target.features[node_type]
    gap = np.linalg.norm(xt.mean(axis=0) - xs.mean(axis=0))
    se = np.sqrt((xs.var(axis=0, ddof=1) / len(xs)).sum() + (xt.var(axis=0, ddof=1) / len(xt)).sum())
    return float(gap), float(se)


LARGE = dict(papers=600, authors=500, venues=200, source_private=50, target_private=50)


def _small(**overrides):
    values = dict(papers=60, authors=40, venues=8, source_private=30, target_private=24, seed=3)
    values.update(overrides)
    return SyntheticConfig(**values)


class TestGenerateSyntheticPair:
    def test_deterministic_in_seed(self):
        assert generate_synthetic_pair(_small()) == generate_synthetic_pair(_small())

    def test_seed_argument_overrides_config(self):
        a = generate_synthetic_pair(_small(), seed=11)
        b = generate_synthetic_pair(_small(seed=11))
        assert a == b
        assert a != generate_synthetic_pair(_small())

    def test_counts_and_dims(self):
        config = _small()
        pair = generate_synthetic_pair(config)
        assert pair.source.node_counts == {"P": 60, "A": 40, "V": 8, "T": 30}
        assert pair.target.node_counts == {"P": 60, "A": 40, "V": 8, "F": 24}
        assert pair.source.feature_dim("T") == config.dim_source_private
        assert pair.target.feature_dim("F") == config.dim_target_private
        assert pair.schema.num_classes == config.classes

    def test_labels_are_balanced_and_held_out(self):
        pair = generate_synthetic_pair(_small())
        assert pair.target.labels is None
        np.testing.assert_array_equal(np.bincount(pair.source.labels), [10, 10, 10, 10])
        np.testing.assert_array_equal(np.bincount(pair.held_out_labels), [10, 10, 10, 10])

    def test_every_paper_has_a_venue_and_an_author(self):
        pair = generate_synthetic_pair(_small(density=0.2))
        for domain in DomainTag:
            graph = pair.graph(domain)
            assert len(graph.edges["P-V"]) == 60
            assert set(graph.edges["P-A"][:, 0]) == set(range(60))

    def test_no_duplicate_edges(self):
        pair = generate_synthetic_pair(_small())
        for relation, edges in pair.source.edges.items():
            assert len({tuple(e) for e in edges.tolist()}) == len(edges), relation

    def test_shift_moves_target_means(self):
        near = generate_synthetic_pair(_small(shift=0.0, noise=0.1))
        far = generate_synthetic_pair(_small(shift=5.0, noise=0.1))
        gap_near = np.linalg.norm(near.source.features["A"].mean(0) - near.target.features["A"].mean(0))
        gap_far = np.linalg.norm(far.source.features["A"].mean(0) - far.target.features["A"].mean(0))
        assert gap_far > gap_near + 3.0

    @pytest.mark.parametrize("node_type", ["P", "A", "V"])
    def test_shift_two_moves_each_shared_type_mean_by_two(self, node_type):
        pair = generate_synthetic_pair(SyntheticConfig(shift=2.0, seed=5, **LARGE))
        gap, se = _mean_gap(pair, node_type)
        assert abs(gap - 2.0) < 3 * se

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_zero_shift_means_agree_within_three_standard_errors(self, seed):
        pair = generate_synthetic_pair(SyntheticConfig(shift=0.0, seed=seed, **LARGE))
        for node_type in ("P", "A", "V"):
            gap, se = _mean_gap(pair, node_type)
            assert gap < 3 * se, node_type

    def test_shift_lies_in_the_span_of_the_class_means(self):
        config = SyntheticConfig(shift=1.0, separation=1.0, noise=0.01, seed=4, **LARGE)
        pair = generate_synthetic_pair(config)
        xs, xt = pair.source.features["A"], pair.target.features["A"]
        direction = xt.mean(axis=0) - xs.mean(axis=0)
        class_means = np.stack([xs[pair.source.labels == k].mean(axis=0) for k in range(config.classes)])
        centred = class_means - class_means.mean(axis=0)
        coefficients = np.linalg.lstsq(centred.T, direction, rcond=None)[0]
        residual = direction - centred.T @ coefficients
        assert float(residual @ residual) < 1e-3 * float(direction @ direction)

    def test_shift_breaks_a_source_only_classifier(self):
        drops = []
        for seed in range(5):
            config = SyntheticConfig(shift=1.5, separation=0.3, noise=0.25, seed=seed, **LARGE)
            pair = generate_synthetic_pair(config)
            xs, xt = pair.source.features["A"], pair.target.features["A"]
            means = np.stack([xs[pair.source.labels == k].mean(axis=0) for k in range(config.classes)])

            def nearest_mean_accuracy(x, labels):
                predicted = ((x[:, None, :] - means[None]) ** 2).sum(-1).argmin(axis=1)
                return float(np.mean(predicted == labels))

            drops.append(nearest_mean_accuracy(xs, pair.source.labels) - nearest_mean_accuracy(xt, pair.held_out_labels))
        assert np.mean(drops) >= 0.15

    def test_density_thins_target_links(self):
        dense = generate_synthetic_pair(_small(density=1.0))
        sparse = generate_synthetic_pair(_small(density=0.3))
        assert len(sparse.target.edges["P-F"]) < len(dense.target.edges["P-F"])
        assert len(sparse.source.edges["P-T"]) > 0
