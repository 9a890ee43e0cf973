"""Directional experiments on a shifted synthetic pair; minutes each, so ``-m slow`` only."""
import functools
import statistics

import numpy as np
import pytest
import torch

from gda_hin.config import Ablation, GrlConfig, SyntheticConfig, TrainConfig
from gda_hin.hin.graph import DomainTag
from gda_hin.hin.synthetic import generate_synthetic_pair
from gda_hin.runner import run
from gda_hin.training.trainer import class_embeddings

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2, 3, 4]
SHIFTED = SyntheticConfig(
    classes=4, papers=500, authors=400, venues=300, source_private=350, target_private=320,
    shift=1.5, density=0.7, separation=0.3, noise=0.25, seed=11,
)
# beta * coefficient = gamma * coefficient = 1 at the end of the ramp
ADVERSARIAL = GrlConfig(coefficient=10.0)


@functools.lru_cache(maxsize=None)
def _pair():
    return generate_synthetic_pair(SHIFTED)


@functools.lru_cache(maxsize=None)
def _outcome(ablation: Ablation, seed: int):
    return run(_pair(), TrainConfig(ablation=ablation, seed=seed, grl=ADVERSARIAL, log_every=0))


def _median_accuracy(ablation: Ablation) -> float:
    return statistics.median(_outcome(ablation, s).report.accuracy for s in SEEDS)


def _domain_classifier_accuracy(embeddings: dict[DomainTag, np.ndarray], seed: int) -> float:
    """Held-out accuracy of a logistic regression predicting the domain of an embedding."""
    x = np.concatenate([embeddings[DomainTag.SOURCE], embeddings[DomainTag.TARGET]])
    y = np.concatenate([np.zeros(len(embeddings[DomainTag.SOURCE])), np.ones(len(embeddings[DomainTag.TARGET]))])
    x = (x - x.mean(axis=0)) / (x.std(axis=0) + 1e-8)
    order = np.random.default_rng(seed).permutation(len(y))
    train, test = order[: len(y) // 2], order[len(y) // 2 :]

    torch.manual_seed(seed)
    features, targets = torch.as_tensor(x), torch.as_tensor(y)
    classifier = torch.nn.Linear(x.shape[1], 1).double()
    optimizer = torch.optim.LBFGS(classifier.parameters(), max_iter=200)

    def closure():
        optimizer.zero_grad()
        loss = torch.nn.functional.binary_cross_entropy_with_logits(
            classifier(features[train]).squeeze(-1), targets[train]
        ) + 1e-3 * classifier.weight.pow(2).sum()
        loss.backward()
        return loss

    optimizer.step(closure)
    with torch.no_grad():
        predicted = (classifier(features[test]).squeeze(-1) > 0).double()
    return float((predicted == targets[test]).double().mean())


class TestDomainAdaptation:
    def test_adaptation_beats_the_no_da_baseline(self):
        assert _median_accuracy(Ablation.FULL) >= _median_accuracy(Ablation.NO_DA) + 0.05

    @pytest.mark.parametrize("ablation", [Ablation.W_S, Ablation.WO_P, Ablation.WO_T])
    def test_full_model_is_at_least_as_good_as_each_ablation(self, ablation):
        assert _median_accuracy(Ablation.FULL) >= _median_accuracy(ablation) - 0.01

    def test_adapted_embeddings_mix_the_domains(self):
        def domain_separability(ablation: Ablation) -> float:
            scores = [
                _domain_classifier_accuracy(class_embeddings(_outcome(ablation, s).result.model, _pair()), s)
                for s in SEEDS
            ]
            return statistics.median(scores)

        assert domain_separability(Ablation.FULL) <= domain_separability(Ablation.NO_DA) - 0.15
