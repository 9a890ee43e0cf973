import math

import numpy as np
import pytest

from gda_hin.config import TrainConfig
from gda_hin.exceptions import ContractError
from gda_hin.training.pseudo import PseudoLabelSet, class_caps, select_pseudo_labels


def _config(threshold: float = 0.9, fraction: float = 1.0) -> TrainConfig:
    return TrainConfig(pseudo_threshold=threshold, pseudo_max_fraction=fraction)


def _oracle(probs: np.ndarray, threshold: float, fraction: float) -> list[int]:
    predicted = [int(np.argmax(row)) for row in probs]
    confidence = [float(row[c]) for row, c in zip(probs, predicted)]
    caps = [math.floor(fraction * predicted.count(c)) for c in range(probs.shape[1])]
    order = sorted(
        (i for i in range(len(probs)) if confidence[i] >= threshold),
        key=lambda i: (-confidence[i], i),
    )
    taken = [0] * probs.shape[1]
    chosen = []
    for i in order:
        if taken[predicted[i]] < caps[predicted[i]]:
            taken[predicted[i]] += 1
            chosen.append(i)
    return sorted(chosen)


class TestSelectPseudoLabels:
    def test_threshold(self):
        probs = np.array([[0.95, 0.05], [0.6, 0.4], [0.1, 0.9], [0.5, 0.5]])
        selected = select_pseudo_labels(probs, _config())
        assert selected.indices.tolist() == [0, 2]
        assert selected.classes.tolist() == [0, 1]
        np.testing.assert_allclose(selected.confidences, [0.95, 0.9])

    def test_threshold_one_keeps_only_certain_rows(self):
        probs = np.array([[0.99, 0.01], [0.3, 0.7]])
        assert len(select_pseudo_labels(probs, _config(threshold=1.0))) == 0
        certain = np.array([[1.0, 0.0], [0.3, 0.7]])
        assert select_pseudo_labels(certain, _config(threshold=1.0)).indices.tolist() == [0]

    def test_cap_takes_the_most_confident(self):
        probs = np.array([[0.99, 0.01], [0.95, 0.05], [0.99, 0.01], [0.97, 0.03]])
        selected = select_pseudo_labels(probs, _config(fraction=0.5))
        assert selected.indices.tolist() == [0, 2]

    def test_ties_break_on_node_index(self):
        probs = np.tile([0.95, 0.05], (3, 1))
        assert select_pseudo_labels(probs, _config(fraction=0.34)).indices.tolist() == [0]

    def test_zero_fraction_selects_nothing(self):
        probs = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert len(select_pseudo_labels(probs, _config(fraction=0.0))) == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_sort_filter_cap_oracle(self, seed):
        rng = np.random.default_rng(seed)
        probs = rng.dirichlet(np.full(4, 0.3), size=100)
        threshold = float(rng.uniform(0.4, 0.9))
        fraction = float(rng.uniform(0.1, 1.0))
        selected = select_pseudo_labels(probs, _config(threshold, fraction))
        assert selected.indices.tolist() == _oracle(probs, threshold, fraction)
        assert np.all(selected.confidences >= threshold)
        np.testing.assert_array_equal(selected.classes, probs[selected.indices].argmax(axis=1))

    def test_empty_matrix(self):
        assert len(select_pseudo_labels(np.zeros((0, 3)), _config())) == 0

    def test_rows_must_sum_to_one(self):
        with pytest.raises(ContractError, match="row 1"):
            select_pseudo_labels(np.array([[0.5, 0.5], [0.5, 0.6]]), _config())

    def test_must_be_two_dimensional(self):
        with pytest.raises(ContractError):
            select_pseudo_labels(np.array([0.5, 0.5]), _config())


class TestHelpers:
    def test_class_caps(self):
        predicted = np.array([0, 0, 0, 1, 2, 2])
        assert class_caps(predicted, 4, 0.5).tolist() == [1, 0, 1, 0]

    def test_class_counts(self):
        labels = PseudoLabelSet(np.array([0, 3, 4]), np.array([1, 1, 0]), np.array([0.9, 0.9, 0.95]))
        assert labels.class_counts(3).tolist() == [1, 2, 0]

    def test_empty_set(self):
        empty = PseudoLabelSet.empty()
        assert len(empty) == 0
        assert empty.class_counts(2).tolist() == [0, 0]
