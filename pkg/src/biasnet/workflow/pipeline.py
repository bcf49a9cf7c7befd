"""End-to-end training and evaluation runs built from the library operations.

Every stage draws from its own seed derived from the run's master seed:

  master seed
    ├── (1,)        training-set draws
    ├── (2, class)  prevision forests
    ├── (3,)        class selector
    └── (4, class)  evaluation design
"""

from dataclasses import dataclass, field
import logging
from pathlib import Path

import numpy as np

from biasnet.config.models import BiasnetConfig
from biasnet.engine.models import ModelSpec
from biasnet.engine.rng import derive_seed
from biasnet.experiment.design import FactorialDesign
from biasnet.experiment.importance import ImportanceReport, importance_report
from biasnet.experiment.runner import EvalReport, run_design
from biasnet.forest.forest import Forest
from biasnet.prevision.model import (
    DICHOTOMIZED,
    UNDICHOTOMIZED,
    PrevisionConfig,
    PrevisionModel,
    restricted_selector_mask,
    selector_oob_accuracy,
    train_class_selector,
    train_prevision,
)
from biasnet.prevision.prior import PriorSpec
from biasnet.prevision.training import TrainingSet, generate_paired_training_set

logger = logging.getLogger(__name__)


@dataclass
class TrainedModels:
    """Prevision models per model class, the shared training set and the optional selector."""

    models: dict[str, PrevisionModel]
    training: TrainingSet
    selector: Forest | None = None
    selector_accuracy: dict[str, float | None] = field(default_factory=dict)

    def save(self, directory: Path) -> list[Path]:
        """One model directory per class (the selector is stored in each)."""
        directory = Path(directory)
        written = []
        nested = len(self.models) > 1
        for model_class, model in self.models.items():
            target = directory / model_class if nested else directory
            model.save(target, diagnostics=self.selector_accuracy)
            written.append(target)
        return written


def train_models(
    specs: list[ModelSpec],
    config: BiasnetConfig,
    draws: int,
    seed: int,
    show_progress: bool = False,
) -> TrainedModels:
    """Simulate a paired training set and fit a prevision model per class.

    With both model classes present a class selector is trained on the paired
    samples and attached to every model.
    """
    n = specs[0].n
    prior: PriorSpec = config.prior.to_spec(n)
    burnin = config.simulation.burnin_multiplier * n * n
    training = generate_paired_training_set(
        prior, draws, specs, burnin, derive_seed(seed, 1), config.threads, show_progress
    )

    models: dict[str, PrevisionModel] = {}
    for k, spec in enumerate(specs):
        cfg = PrevisionConfig(
            forest=config.forest.to_config(),
            quantiles=tuple(config.quantiles),
            seed=derive_seed(seed, 2, k),
            threads=config.threads,
        )
        models[spec.model_class] = train_prevision(
            training.params, training.features[spec.model_class], cfg, spec, prior
        )

    trained = TrainedModels(models=models, training=training)
    if {"undichotomized", "dichotomized"} <= set(training.features):
        attach_selector(trained, config, seed, n)
    return trained


def attach_selector(trained: TrainedModels, config: BiasnetConfig, seed: int, n: int) -> None:
    training = trained.training
    forest_cfg = config.forest.to_config(seed=derive_seed(seed, 3))
    selector = train_class_selector(
        training.features["undichotomized"], training.features["dichotomized"], forest_cfg, config.threads
    )
    x = np.vstack([training.features["undichotomized"], training.features["dichotomized"]])
    y = np.concatenate([np.full(training.m, UNDICHOTOMIZED), np.full(training.m, DICHOTOMIZED)])
    mask = restricted_selector_mask(
        np.vstack([training.params, training.params]),
        np.concatenate(
            [training.mean_degrees("undichotomized", n), training.mean_degrees("dichotomized", n)]
        ),
    )
    trained.selector = selector
    trained.selector_accuracy = {
        "selector_oob_accuracy": selector_oob_accuracy(selector, x, y),
        "selector_oob_accuracy_restricted": selector_oob_accuracy(selector, x, y, mask),
        "selector_restricted_rows": float(mask.sum()),
    }
    logger.info(f"Class selector OOB accuracy: {trained.selector_accuracy}")
    for model in trained.models.values():
        model.selector = selector


def run_experiment(
    trained: TrainedModels,
    config: BiasnetConfig,
    seed: int,
    replications: int,
    with_importance: bool = True,
) -> EvalReport:
    """Score every trained model on the standard factorial design."""
    specs = [model.model_spec for model in trained.models.values()]
    n = specs[0].n
    design = FactorialDesign.standard(n, replications=replications, model_specs=specs)
    burnin = config.simulation.burnin_multiplier * n * n

    report: EvalReport | None = None
    importance: ImportanceReport | None = None
    nested = len(trained.models) > 1
    for k, (model_class, model) in enumerate(trained.models.items()):
        part = run_design(
            design, model, model.model_spec, burnin, derive_seed(seed, 4, k), config.threads
        )
        report = part if report is None else report.merge(part)
        if with_importance:
            scores = importance_report(
                model,
                trained.training.params,
                trained.training.features[model_class],
                prefix=model_class if nested else None,
            )
            importance = scores if importance is None else importance.merge(scores)

    assert report is not None
    return report.model_copy(update={"importance": importance, "seed": seed})
