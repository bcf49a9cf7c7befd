"""Approximate Bayesian prevision: prior sampling, training sets and forest posteriors."""

from biasnet.prevision.model import (
    DEFAULT_QUANTILES,
    DICHOTOMIZED,
    MANIFEST_FILE,
    UNDICHOTOMIZED,
    ModelManifest,
    ParameterPosterior,
    PosteriorSummary,
    PrevisionConfig,
    PrevisionModel,
    SummaryDiagnostics,
    posterior_summary,
    read_manifest,
    restricted_selector_mask,
    selector_oob_accuracy,
    train_class_selector,
    train_prevision,
)
from biasnet.prevision.prior import ParameterPrior, PriorSpec, sample_prior, sample_prior_matrix
from biasnet.prevision.training import (
    DrawTask,
    TrainingSet,
    generate_paired_training_set,
    generate_training_set,
    simulate_draw,
)

__all__ = [
    "DEFAULT_QUANTILES",
    "DICHOTOMIZED",
    "MANIFEST_FILE",
    "UNDICHOTOMIZED",
    "DrawTask",
    "ModelManifest",
    "ParameterPosterior",
    "ParameterPrior",
    "PosteriorSummary",
    "PrevisionConfig",
    "PrevisionModel",
    "PriorSpec",
    "SummaryDiagnostics",
    "TrainingSet",
    "generate_paired_training_set",
    "generate_training_set",
    "posterior_summary",
    "read_manifest",
    "restricted_selector_mask",
    "sample_prior",
    "sample_prior_matrix",
    "selector_oob_accuracy",
    "simulate_draw",
    "train_class_selector",
    "train_prevision",
]
