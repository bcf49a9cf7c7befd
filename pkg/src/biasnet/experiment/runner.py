"""Frequentist evaluation of prevision models on a factorial design."""

from collections.abc import Callable
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from biasnet.engine.models import PARAM_NAMES, ModelSpec, ParamVector
from biasnet.engine.rng import substream
from biasnet.engine.sampler import sfbn_sample
from biasnet.errors import InvalidArgumentError
from biasnet.experiment.design import FactorialDesign
from biasnet.experiment.importance import ImportanceReport
from biasnet.features.vector import featurize
from biasnet.prevision.model import PosteriorSummary, PrevisionModel
from biasnet.workflow.batch import run_batch

logger = logging.getLogger(__name__)

INTERVAL = (0.025, 0.975)


@dataclass(frozen=True)
class CaseTask:
    seed: int
    index: int
    psi: ParamVector
    spec: ModelSpec
    burnin: int


@dataclass
class DesignSample:
    """Simulated test graphs: one row per (cell, replicate), cells outermost."""

    spec: ModelSpec
    truths: np.ndarray
    features: np.ndarray
    cell_ids: np.ndarray


Estimator = Callable[[DesignSample], list[PosteriorSummary]]


class ParameterMetrics(BaseModel):
    parameter: str
    model_class: str
    bias: float = Field(description="Mean of estimate - truth")
    mae: float = Field(ge=0.0, description="Median absolute error")
    coverage: float = Field(ge=0.0, le=1.0, description="Share of central 95% intervals containing truth")
    replicates: int = Field(ge=0)

    model_config = ConfigDict(extra="forbid")


class EvalReport(BaseModel):
    """Bias, MAE and coverage per parameter and model class, plus optional importance."""

    metrics: list[ParameterMetrics]
    importance: ImportanceReport | None = None
    cells: int = 0
    replications: int = 0
    seed: int | None = None

    model_config = ConfigDict(extra="forbid")

    def metric(self, parameter: str, model_class: str = "undichotomized") -> ParameterMetrics:
        for m in self.metrics:
            if m.parameter == parameter and m.model_class == model_class:
                return m
        raise KeyError(f"no metrics for {parameter} / {model_class}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([m.model_dump() for m in self.metrics])

    def merge(self, other: "EvalReport") -> "EvalReport":
        importance = self.importance
        if importance is not None and other.importance is not None:
            importance = importance.merge(other.importance)
        return EvalReport(
            metrics=[*self.metrics, *other.metrics],
            importance=importance or other.importance,
            cells=self.cells,
            replications=self.replications,
            seed=self.seed,
        )


def simulate_case(task: CaseTask) -> np.ndarray:
    g = sfbn_sample(task.psi, task.spec, task.burnin, substream(task.seed, task.index))
    return featurize(g).values


def simulate_design(
    design: FactorialDesign, spec: ModelSpec, burnin: int, seed: int, threads: int = 1
) -> DesignSample:
    """One independent chain per (cell, replicate), each on substream (seed, case index)."""
    cells = design.cells()
    tasks = [
        CaseTask(seed, c * design.replications + r, psi, spec, burnin)
        for c, psi in enumerate(cells)
        for r in range(design.replications)
    ]
    logger.info(
        f"Simulating {len(cells)} cells x {design.replications} replicates ({spec.model_class})"
    )
    rows = run_batch(simulate_case, tasks, threads, description=f"Simulating {spec.model_class} design")
    return DesignSample(
        spec=spec,
        truths=np.vstack([t.psi.as_array() for t in tasks]),
        features=np.vstack(rows),
        cell_ids=np.repeat(np.arange(len(cells)), design.replications),
    )


def evaluate(sample: DesignSample, summaries: list[PosteriorSummary]) -> list[ParameterMetrics]:
    """Aggregate per-replicate errors and interval hits into per-parameter metrics.

    Raises:
        InvalidArgumentError: If the summary count differs or lacks the 95% interval levels.
    """
    if len(summaries) != sample.truths.shape[0]:
        raise InvalidArgumentError(
            f"{len(summaries)} summaries for {sample.truths.shape[0]} simulated graphs"
        )
    for level in INTERVAL:
        if summaries and level not in summaries[0].quantile_levels:
            raise InvalidArgumentError(f"summaries lack the {level} quantile")

    metrics = []
    for k, name in enumerate(PARAM_NAMES):
        truth = sample.truths[:, k]
        estimate = np.array([s.parameters[name].mean for s in summaries])
        bounds = np.array([s.interval(name, *INTERVAL) for s in summaries]).reshape(-1, 2)
        error = estimate - truth
        covered = (bounds[:, 0] <= truth) & (truth <= bounds[:, 1])
        metrics.append(
            ParameterMetrics(
                parameter=name,
                model_class=sample.spec.model_class,
                bias=float(error.mean()) if error.size else 0.0,
                mae=float(np.median(np.abs(error))) if error.size else 0.0,
                coverage=float(covered.mean()) if covered.size else 0.0,
                replicates=int(error.size),
            )
        )
    return metrics


def run_design(
    design: FactorialDesign,
    model: PrevisionModel,
    spec: ModelSpec | None = None,
    burnin: int = 0,
    seed: int = 0,
    threads: int = 1,
    estimator: Estimator | None = None,
) -> EvalReport:
    """Simulate every cell replicate at its true psi and score the model's posteriors.

    Args:
        design: Truth grid and replicate count
        model: Trained prevision model
        spec: Model used to simulate (default: the model's own)
        burnin: Chain steps per replicate
        seed: Master seed; case k uses substream (seed, k)
        threads: Worker processes for simulation
        estimator: Replaces ``model.summarize`` on the simulated sample
    """
    spec = spec or model.model_spec
    if spec.n != model.model_spec.n:
        raise InvalidArgumentError(
            f"design order {spec.n} differs from the model's training order {model.model_spec.n}"
        )
    sample = simulate_design(design, spec, burnin, seed, threads)
    if estimator is None:
        summaries, diagnostics = model.summarize(sample.features)
        logger.info(f"Variance clamp rate on the design: {diagnostics.clamp_rate:.2%}")
    else:
        summaries = estimator(sample)
    return EvalReport(
        metrics=evaluate(sample, summaries),
        cells=design.n_cells,
        replications=design.replications,
        seed=seed,
    )
