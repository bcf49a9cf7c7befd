"""Forest-based posterior approximations and the model-class selector."""

from collections.abc import Sequence
import hashlib
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from biasnet.engine.models import PARAM_NAMES, ModelSpec
from biasnet.engine.rng import derive_seed
from biasnet.errors import ArtifactFormatError, InvalidArgumentError, SchemaMismatchError
from biasnet.features.vector import FEATURE_NAMES, featurize, schema_hash
from biasnet.forest.forest import Forest, train
from biasnet.forest.models import ForestConfig, ForestTask
from biasnet.forest.persistence import load_forest, save_forest
from biasnet.graph.digraph import DiGraph
from biasnet.prevision.prior import PriorSpec

logger = logging.getLogger(__name__)

DEFAULT_QUANTILES: tuple[float, ...] = (0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975)
MANIFEST_FILE = "manifest.json"
SELECTOR_FILE = "selector.bnf"
MANIFEST_VERSION = 1

#: Selector labels.
UNDICHOTOMIZED = 1
DICHOTOMIZED = 0

_ROLES = ("mean", "square", "quantile")


class ParameterPosterior(BaseModel):
    mean: float
    sd: float = Field(ge=0.0)
    quantiles: list[float]

    model_config = ConfigDict(extra="forbid")


class PosteriorSummary(BaseModel):
    """Approximate posterior mean, sd and quantiles of every parameter for one graph."""

    model_class: str = Field(description="Model class the forests were trained on")
    quantile_levels: list[float] = Field(description="Levels of the reported quantiles")
    parameters: dict[str, ParameterPosterior] = Field(description="Summary per parameter")
    undichotomized_probability: float | None = Field(
        default=None, ge=0.0, le=1.0, description="Selector probability of the undichotomized class"
    )
    variance_clamped: list[str] = Field(
        default_factory=list, description="Parameters whose variance estimate was negative"
    )

    model_config = ConfigDict(extra="forbid")

    def quantile(self, name: str, level: float) -> float:
        return self.parameters[name].quantiles[self.quantile_levels.index(level)]

    def interval(self, name: str, lower: float = 0.025, upper: float = 0.975) -> tuple[float, float]:
        return self.quantile(name, lower), self.quantile(name, upper)

    @property
    def preferred_model(self) -> str | None:
        if self.undichotomized_probability is None:
            return None
        return "undichotomized" if self.undichotomized_probability >= 0.5 else "dichotomized"


class SummaryDiagnostics(BaseModel):
    rows: int = 0
    variance_clamps: dict[str, int] = Field(default_factory=dict)
    max_sort_perturbation: float = 0.0

    @property
    def clamp_rate(self) -> float:
        total = sum(self.variance_clamps.values())
        return total / (self.rows * len(PARAM_NAMES)) if self.rows else 0.0


class PrevisionConfig(BaseModel):
    """Forest settings and quantile levels for training a prevision model."""

    forest: ForestConfig = Field(default_factory=ForestConfig)
    quantiles: tuple[float, ...] = Field(default=DEFAULT_QUANTILES)
    seed: int = Field(default=0, ge=0, description="Master seed for every forest")
    threads: int = Field(default=1, ge=1, description="Tree-growing threads")

    model_config = ConfigDict(extra="forbid")

    def forest_config(self, param_index: int, role: str) -> ForestConfig:
        task = ForestTask.QUANTILE if role == "quantile" else ForestTask.REGRESSION
        seed = derive_seed(self.seed, param_index, _ROLES.index(role))
        return self.forest.model_copy(update={"task": task, "seed": seed})


class ModelManifest(BaseModel):
    """Provenance and layout of a saved prevision model directory."""

    format_version: int = MANIFEST_VERSION
    biasnet_version: str
    model_spec: ModelSpec
    prior: PriorSpec
    seed: int
    schema_hash: str
    feature_names: list[str]
    quantile_levels: list[float]
    forest_config: ForestConfig
    config_hash: str
    training_rows: int
    forests: dict[str, str]
    selector: str | None = None
    diagnostics: dict[str, float | None] = Field(default_factory=dict)


class PrevisionModel:
    """Per-parameter mean, mean-square and quantile forests over one feature schema."""

    def __init__(
        self,
        model_spec: ModelSpec,
        prior: PriorSpec,
        config: PrevisionConfig,
        mean_forests: dict[str, Forest],
        square_forests: dict[str, Forest],
        quantile_forests: dict[str, Forest],
        selector: Forest | None = None,
        training_rows: int = 0,
    ):
        names = {
            tuple(f.feature_names)
            for group in (mean_forests, square_forests, quantile_forests)
            for f in group.values()
        }
        if selector is not None:
            names.add(tuple(selector.feature_names))
        if len(names) != 1:
            raise SchemaMismatchError("prevision forests do not share one feature schema")
        self.model_spec = model_spec
        self.prior = prior
        self.config = config
        self.mean_forests = mean_forests
        self.square_forests = square_forests
        self.quantile_forests = quantile_forests
        self.selector = selector
        self.training_rows = training_rows
        self.feature_names = list(names.pop())

    @property
    def schema_hash(self) -> str:
        return schema_hash(self.feature_names)

    @property
    def quantile_levels(self) -> list[float]:
        return list(self.config.quantiles)

    def forest(self, name: str, role: str) -> Forest:
        group = {"mean": self.mean_forests, "square": self.square_forests, "quantile": self.quantile_forests}
        return group[role][name]

    def summarize(self, features: np.ndarray) -> tuple[list[PosteriorSummary], SummaryDiagnostics]:
        """Posterior summaries for each row of a feature matrix."""
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if x.shape[1] != len(self.feature_names):
            raise InvalidArgumentError(
                f"feature rows have {x.shape[1]} columns, model expects {len(self.feature_names)}"
            )
        levels = self.quantile_levels
        diagnostics = SummaryDiagnostics(rows=x.shape[0])
        per_param: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}

        for name in PARAM_NAMES:
            mean = np.atleast_1d(self.mean_forests[name].predict(x))
            square = np.atleast_1d(self.square_forests[name].predict(x))
            variance = square - mean**2
            clamped = variance < 0.0
            diagnostics.variance_clamps[name] = int(clamped.sum())
            raw = self.quantile_forests[name].predict_quantiles(x, levels)
            ordered = np.sort(raw, axis=1)
            diagnostics.max_sort_perturbation = max(
                diagnostics.max_sort_perturbation, float(np.max(np.abs(ordered - raw), initial=0.0))
            )
            per_param[name] = (mean, np.sqrt(np.maximum(variance, 0.0)), ordered, clamped)

        if sum(diagnostics.variance_clamps.values()):
            logger.info(
                f"Clamped negative variance estimates in {diagnostics.clamp_rate:.2%} of cells: "
                f"{diagnostics.variance_clamps}"
            )
        if diagnostics.max_sort_perturbation > 0.0:
            logger.info(f"Sorting quantiles moved values by at most {diagnostics.max_sort_perturbation:.3g}")

        probabilities = self.undichotomized_probability(x) if self.selector is not None else None
        summaries = []
        for r in range(x.shape[0]):
            summaries.append(
                PosteriorSummary(
                    model_class=self.model_spec.model_class,
                    quantile_levels=levels,
                    parameters={
                        name: ParameterPosterior(
                            mean=float(mean[r]), sd=float(sd[r]), quantiles=ordered[r].tolist()
                        )
                        for name, (mean, sd, ordered, _) in per_param.items()
                    },
                    undichotomized_probability=(
                        float(probabilities[r]) if probabilities is not None else None
                    ),
                    variance_clamped=[name for name, (*_, clamped) in per_param.items() if clamped[r]],
                )
            )
        return summaries, diagnostics

    def undichotomized_probability(self, features: np.ndarray) -> np.ndarray:
        if self.selector is None:
            raise InvalidArgumentError("model has no class selector")
        proba = np.atleast_2d(self.selector.predict_proba(np.atleast_2d(features)))
        # a selector that only saw one class has a single vote column
        column = np.flatnonzero(np.asarray(self.selector.classes) == UNDICHOTOMIZED)
        if column.size == 0:
            return np.zeros(proba.shape[0])
        return proba[:, int(column[0])]

    def save(self, directory: Path, diagnostics: dict[str, float | None] | None = None) -> ModelManifest:
        """Write one container per forest plus ``manifest.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files: dict[str, str] = {}
        for name in PARAM_NAMES:
            for role in _ROLES:
                filename = f"{name}_{role}.bnf"
                save_forest(self.forest(name, role), directory / filename)
                files[f"{name}.{role}"] = filename
        selector_file = None
        if self.selector is not None:
            selector_file = SELECTOR_FILE
            save_forest(self.selector, directory / SELECTOR_FILE)

        manifest = ModelManifest(
            biasnet_version=_package_version(),
            model_spec=self.model_spec,
            prior=self.prior,
            seed=self.config.seed,
            schema_hash=self.schema_hash,
            feature_names=self.feature_names,
            quantile_levels=self.quantile_levels,
            forest_config=self.config.forest,
            config_hash=config_hash(self.config, self.model_spec, self.prior),
            training_rows=self.training_rows,
            forests=files,
            selector=selector_file,
            diagnostics=diagnostics or {},
        )
        with open(directory / MANIFEST_FILE, "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2)
        logger.debug(f"Saved {self.model_spec.model_class} prevision model to {directory}")
        return manifest

    @classmethod
    def load(cls, directory: Path, expected_schema_hash: str | None = None) -> "PrevisionModel":
        """Read a model directory written by ``save``.

        Raises:
            ArtifactFormatError: If the manifest is missing, unreadable or lists missing forests.
            SchemaMismatchError: If the schema hash differs from ``expected_schema_hash``.
        """
        directory = Path(directory)
        manifest = read_manifest(directory)
        if expected_schema_hash is not None and manifest.schema_hash != expected_schema_hash:
            raise SchemaMismatchError(
                f"model in {directory} uses schema {manifest.schema_hash}, expected {expected_schema_hash}"
            )
        groups: dict[str, dict[str, Forest]] = {role: {} for role in _ROLES}
        for name in PARAM_NAMES:
            for role in _ROLES:
                filename = manifest.forests.get(f"{name}.{role}")
                if filename is None or not (directory / filename).exists():
                    raise ArtifactFormatError(f"model in {directory} has no {role} forest for {name}")
                groups[role][name] = load_forest(directory / filename, manifest.schema_hash)
        selector = None
        if manifest.selector:
            if not (directory / manifest.selector).exists():
                raise ArtifactFormatError(f"manifest in {directory} lists missing selector {manifest.selector}")
            selector = load_forest(directory / manifest.selector, manifest.schema_hash)
        config = PrevisionConfig(
            forest=manifest.forest_config,
            quantiles=tuple(manifest.quantile_levels),
            seed=manifest.seed,
        )
        return cls(
            model_spec=manifest.model_spec,
            prior=manifest.prior,
            config=config,
            mean_forests=groups["mean"],
            square_forests=groups["square"],
            quantile_forests=groups["quantile"],
            selector=selector,
            training_rows=manifest.training_rows,
        )


def read_manifest(directory: Path) -> ModelManifest:
    path = Path(directory) / MANIFEST_FILE
    if not path.exists():
        raise ArtifactFormatError(f"no {MANIFEST_FILE} in {directory}")
    try:
        with open(path, encoding="utf-8") as f:
            return ModelManifest(**json.load(f))
    except (json.JSONDecodeError, ValueError) as e:
        raise ArtifactFormatError(f"unreadable manifest {path}: {e}") from e


def config_hash(*models: BaseModel) -> str:
    blob = "|".join(m.model_dump_json() for m in models)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _package_version() -> str:
    from biasnet import __version__

    return __version__


def train_prevision(
    params: np.ndarray,
    features: np.ndarray,
    cfg: PrevisionConfig,
    model_spec: ModelSpec,
    prior: PriorSpec,
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> PrevisionModel:
    """Fit mean, mean-square and quantile forests for every parameter.

    Raises:
        InvalidArgumentError: If the matrices disagree in rows or params is not (m, 5).
    """
    params = np.asarray(params, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    if params.ndim != 2 or params.shape[1] != len(PARAM_NAMES):
        raise InvalidArgumentError(f"params must be (m, {len(PARAM_NAMES)}), got {params.shape}")
    if params.shape[0] != features.shape[0]:
        raise InvalidArgumentError(
            f"params has {params.shape[0]} rows but features has {features.shape[0]}"
        )

    groups: dict[str, dict[str, Forest]] = {role: {} for role in _ROLES}
    for k, name in enumerate(PARAM_NAMES):
        target = params[:, k]
        responses = {"mean": target, "square": target**2, "quantile": target}
        for role in _ROLES:
            logger.info(f"Training {role} forest for {name} on {features.shape[0]} rows")
            groups[role][name] = train(
                features, responses[role], cfg.forest_config(k, role), feature_names, cfg.threads
            )

    return PrevisionModel(
        model_spec=model_spec,
        prior=prior,
        config=cfg,
        mean_forests=groups["mean"],
        square_forests=groups["square"],
        quantile_forests=groups["quantile"],
        training_rows=int(params.shape[0]),
    )


def posterior_summary(model: PrevisionModel, g: DiGraph) -> PosteriorSummary:
    """Posterior summary of the parameters that generated ``g``."""
    if g.n != model.model_spec.n:
        logger.warning(
            f"Graph order {g.n} differs from the training order {model.model_spec.n}; "
            "posteriors may be unreliable"
        )
    summaries, _ = model.summarize(featurize(g).values[None, :])
    return summaries[0]


def train_class_selector(
    features_undich: np.ndarray,
    features_dich: np.ndarray,
    cfg: ForestConfig,
    threads: int = 1,
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> Forest:
    """Classification forest separating undichotomized (label 1) from dichotomized (label 0) graphs."""
    features_undich = np.asarray(features_undich, dtype=np.float64)
    features_dich = np.asarray(features_dich, dtype=np.float64)
    if features_undich.shape[1] != features_dich.shape[1]:
        raise SchemaMismatchError("class selector feature sets have different widths")
    x = np.vstack([features_undich, features_dich])
    y = np.concatenate(
        [np.full(len(features_undich), UNDICHOTOMIZED), np.full(len(features_dich), DICHOTOMIZED)]
    )
    config = cfg.model_copy(update={"task": ForestTask.CLASSIFICATION})
    return train(x, y, config, feature_names, threads)


def selector_oob_accuracy(
    selector: Forest, x: np.ndarray, y: np.ndarray, mask: np.ndarray | None = None
) -> float:
    """OOB accuracy of the selector, optionally on a subset of its training rows."""
    proba = selector.oob_predictions(x)
    labels = selector.classes[np.argmax(np.nan_to_num(proba, nan=-1.0), axis=1)]  # type: ignore[index]
    seen = ~np.isnan(proba).any(axis=1)
    if mask is not None:
        seen &= np.asarray(mask, dtype=bool)
    if not seen.any():
        return float("nan")
    return float(np.mean(labels[seen] == np.asarray(y)[seen]))


def restricted_selector_mask(params: np.ndarray, mean_degrees: np.ndarray) -> np.ndarray:
    """Rows with active closure (sigma > 0 or rho > 0) and mean degree at least 1."""
    sigma = params[:, PARAM_NAMES.index("sigma")]
    rho = params[:, PARAM_NAMES.index("rho")]
    return ((sigma > 0) | (rho > 0)) & (np.asarray(mean_degrees) >= 1.0)
