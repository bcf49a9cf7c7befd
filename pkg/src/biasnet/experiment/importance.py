"""Permutation-importance tables and their ranks."""

import logging

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from biasnet.engine.models import PARAM_NAMES
from biasnet.errors import InvalidArgumentError
from biasnet.prevision.model import PrevisionModel

logger = logging.getLogger(__name__)


def _ranks(scores: list[float]) -> list[float]:
    """Rank 1 for the largest score; ties keep feature order."""
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    ranks = [0.0] * len(scores)
    for position, k in enumerate(order, start=1):
        ranks[k] = float(position)
    return ranks


class ImportanceReport(BaseModel):
    """Importance scores keyed by target (``param`` or ``model_class/param``)."""

    feature_names: list[str]
    scores: dict[str, list[float]]
    standard_errors: dict[str, list[float]]

    model_config = ConfigDict(extra="forbid")

    @property
    def targets(self) -> list[str]:
        return list(self.scores)

    def ranks(self, target: str) -> list[float]:
        return _ranks(self.scores[target])

    def rank_of(self, target: str, feature: str) -> int:
        return int(self.ranks(target)[self.feature_names.index(feature)])

    def top(self, target: str, k: int = 1) -> list[str]:
        ranks = self.ranks(target)
        return [self.feature_names[i] for i in sorted(range(len(ranks)), key=ranks.__getitem__)[:k]]

    def bottom(self, target: str, k: int = 1) -> list[str]:
        ranks = self.ranks(target)
        return [self.feature_names[i] for i in sorted(range(len(ranks)), key=ranks.__getitem__)[-k:]]

    def mean_ranks(self) -> dict[str, float]:
        """Average rank of every feature across all targets, most important first."""
        table = np.array([self.ranks(t) for t in self.targets])
        means = table.mean(axis=0)
        order = np.argsort(means, kind="stable")
        return {self.feature_names[i]: float(means[i]) for i in order}

    def merge(self, other: "ImportanceReport") -> "ImportanceReport":
        if other.feature_names != self.feature_names:
            raise InvalidArgumentError("cannot merge importance reports over different features")
        return ImportanceReport(
            feature_names=self.feature_names,
            scores={**self.scores, **other.scores},
            standard_errors={**self.standard_errors, **other.standard_errors},
        )

    def to_frame(self) -> pd.DataFrame:
        """Long table: one row per (target, feature) with score, se and rank."""
        rows = []
        for target in self.targets:
            ranks = self.ranks(target)
            for k, feature in enumerate(self.feature_names):
                rows.append(
                    {
                        "target": target,
                        "feature": feature,
                        "score": self.scores[target][k],
                        "se": self.standard_errors[target][k],
                        "rank": ranks[k],
                    }
                )
        return pd.DataFrame(rows)


def importance_report(
    model: PrevisionModel,
    params: np.ndarray,
    features: np.ndarray,
    prefix: str | None = None,
) -> ImportanceReport:
    """Permutation importance of every statistic for each parameter's mean forest.

    ``params`` and ``features`` must be the rows the model was trained on so
    that the forests' out-of-bag sets refer to them.
    """
    params = np.asarray(params, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    if params.shape[0] != features.shape[0]:
        raise InvalidArgumentError("params and features have different row counts")
    for forest in model.mean_forests.values():
        if forest.oob_mask.shape[1] != params.shape[0]:
            raise InvalidArgumentError("importance needs the model's own training rows")

    scores: dict[str, list[float]] = {}
    errors: dict[str, list[float]] = {}
    for k, name in enumerate(PARAM_NAMES):
        key = f"{prefix}/{name}" if prefix else name
        logger.info(f"Permutation importance for {key}")
        result = model.mean_forests[name].importance(features, params[:, k])
        scores[key] = result.scores.tolist()
        errors[key] = result.standard_errors.tolist()
    return ImportanceReport(feature_names=model.feature_names, scores=scores, standard_errors=errors)
