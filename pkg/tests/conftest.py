"""Shared fixtures for biasnet tests."""

import numpy as np
import pytest

from biasnet.engine.models import ModelSpec
from biasnet.forest.models import ForestConfig
from biasnet.graph.digraph import DiGraph
from biasnet.prevision.model import PrevisionConfig, PrevisionModel, train_prevision
from biasnet.prevision.prior import PriorSpec
from biasnet.prevision.training import TrainingSet, generate_paired_training_set

TINY_N = 12


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def star5() -> DiGraph:
    """Out-star 0 -> {1, 2, 3, 4}."""
    return DiGraph.from_edges(5, [(0, k) for k in range(1, 5)])


@pytest.fixture
def cycle5() -> DiGraph:
    return DiGraph.from_edges(5, [(k, (k + 1) % 5) for k in range(5)])


@pytest.fixture
def random_digraph(rng: np.random.Generator):
    """Factory for G(n, p) digraphs drawn from the shared generator."""

    def make(n: int, p: float) -> DiGraph:
        a = rng.random((n, n)) < p
        np.fill_diagonal(a, False)
        return DiGraph.from_adjacency(a)

    return make


@pytest.fixture(scope="session")
def tiny_training() -> TrainingSet:
    """Paired undichotomized/dichotomized draws on 12 vertices with a short burn-in."""
    prior = PriorSpec(n=TINY_N, target_mean_degree=3.0)
    specs = [ModelSpec(n=TINY_N), ModelSpec(n=TINY_N, dichotomized=True)]
    return generate_paired_training_set(prior, 80, specs, burnin=30 * TINY_N * TINY_N, seed=11)


@pytest.fixture(scope="session")
def tiny_model(tiny_training: TrainingSet) -> PrevisionModel:
    cfg = PrevisionConfig(forest=ForestConfig(n_trees=30), seed=5)
    return train_prevision(
        tiny_training.params,
        tiny_training.features["undichotomized"],
        cfg,
        ModelSpec(n=TINY_N),
        PriorSpec(n=TINY_N, target_mean_degree=3.0),
    )
