"""Simulated (parameter, summary statistic) training sets."""

from collections.abc import Sequence
from dataclasses import dataclass, field
import logging

import numpy as np

from biasnet.engine.models import ModelSpec
from biasnet.engine.rng import make_draw_streams
from biasnet.engine.sampler import sfbn_sample
from biasnet.errors import InvalidArgumentError
from biasnet.features.vector import FEATURE_NAMES, featurize
from biasnet.prevision.prior import PriorSpec, sample_prior
from biasnet.workflow.batch import run_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DrawTask:
    """Everything one worker needs to produce training row ``draw_id``."""

    seed: int
    draw_id: int
    prior: PriorSpec
    specs: tuple[ModelSpec, ...]
    burnin: int


@dataclass
class TrainingSet:
    """Prior draws and, per model class, the features of the graph simulated at each draw."""

    params: np.ndarray
    features: dict[str, np.ndarray]
    structure_fallbacks: dict[str, int] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return int(self.params.shape[0])

    def mean_degrees(self, model_class: str, n: int) -> np.ndarray:
        density = self.features[model_class][:, FEATURE_NAMES.index("Den")]
        return density * (n - 1)


def simulate_draw(task: DrawTask) -> tuple[np.ndarray, list[np.ndarray], list[bool]]:
    """Draw psi from the prior and simulate one graph per model spec, each on its own stream."""
    streams = make_draw_streams(task.seed, task.draw_id)
    psi = sample_prior(task.prior, streams.prior)
    rows: list[np.ndarray] = []
    fallbacks: list[bool] = []
    for spec in task.specs:
        g = sfbn_sample(psi, spec, task.burnin, streams.chain(spec.dichotomized))
        vector = featurize(g)
        rows.append(vector.values)
        fallbacks.append(vector.structure_fallback)
    return psi.as_array(), rows, fallbacks


def generate_paired_training_set(
    prior: PriorSpec,
    m: int,
    specs: Sequence[ModelSpec],
    burnin: int,
    seed: int,
    threads: int = 1,
    show_progress: bool = False,
) -> TrainingSet:
    """Simulate ``m`` draws, each feeding one chain per spec from the same psi.

    Raises:
        InvalidArgumentError: If m < 1, the specs repeat a model class, or their
            order differs from the prior's.
    """
    if m < 1:
        raise InvalidArgumentError(f"draw count must be at least 1, got {m}")
    classes = [spec.model_class for spec in specs]
    if not specs or len(set(classes)) != len(classes):
        raise InvalidArgumentError(f"need distinct model classes, got {classes}")
    for spec in specs:
        if spec.n != prior.n:
            raise InvalidArgumentError(f"model order {spec.n} differs from prior order {prior.n}")

    tasks = [DrawTask(seed, k, prior, tuple(specs), burnin) for k in range(m)]
    logger.info(f"Simulating {m} draws x {len(specs)} model classes at N={prior.n}, burn-in {burnin:,}")
    results = run_batch(
        simulate_draw, tasks, threads, description="Simulating training draws" if show_progress else None
    )

    params = np.vstack([psi for psi, _, _ in results])
    features = {
        cls: np.vstack([rows[c] for _, rows, _ in results]) for c, cls in enumerate(classes)
    }
    fallbacks = {cls: sum(fb[c] for _, _, fb in results) for c, cls in enumerate(classes)}
    for cls, count in fallbacks.items():
        if count:
            logger.info(f"{count}/{m} {cls} graphs had constant structure statistics")
    return TrainingSet(params=params, features=features, structure_fallbacks=fallbacks)


def generate_training_set(
    prior: PriorSpec,
    m: int,
    spec: ModelSpec,
    burnin: int,
    seed: int,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """``m`` rows of (psi, s(graph simulated at psi)) for a single model class."""
    training = generate_paired_training_set(prior, m, [spec], burnin, seed, threads)
    return training.params, training.features[spec.model_class]
