"""Configuration data models for biasnet."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from biasnet.engine.models import ModelSpec
from biasnet.forest.models import ForestConfig
from biasnet.prevision.model import DEFAULT_QUANTILES
from biasnet.prevision.prior import PriorSpec


class SimulationConfig(BaseModel):
    """Chain settings."""

    burnin_multiplier: int = Field(
        default=500, ge=1, description="Burn-in steps per N^2 (500 gives 500 N^2 steps)"
    )

    model_config = ConfigDict(extra="forbid")


class PriorConfig(BaseModel):
    """Spike-and-slab prior settings; the graph order is supplied per run."""

    spike_probability: float = Field(default=0.5, ge=0.0, le=1.0, description="Shared spike weight")
    spike_overrides: dict[str, float] = Field(
        default_factory=dict, description="Per-parameter spike weights (pi, sigma, rho, delta)"
    )
    slab_a: float = Field(default=0.5, gt=0.0, description="Slab Beta shape a")
    slab_b: float = Field(default=1.5, gt=0.0, description="Slab Beta shape b")
    target_mean_degree: float = Field(default=10.0, gt=0.0, description="Prior mean degree for d")
    concentration: float = Field(default=5.0, gt=0.0, description="a + b of d's slab")

    model_config = ConfigDict(extra="forbid")

    def to_spec(self, n: int) -> PriorSpec:
        return PriorSpec(n=n, **self.model_dump())


class ForestSection(BaseModel):
    """Forest hyperparameters shared by every forest a run trains."""

    n_trees: int = Field(default=500, ge=1, description="Trees per forest")
    mtry: int | None = Field(default=None, ge=1, description="Candidate features per split")
    min_node_size: int | None = Field(default=None, ge=1, description="Minimum leaf size")
    max_depth: int | None = Field(default=None, ge=1, description="Maximum tree depth")

    model_config = ConfigDict(extra="forbid")

    def to_config(self, seed: int = 0) -> ForestConfig:
        return ForestConfig(seed=seed, **self.model_dump())


class TrainingConfig(BaseModel):
    draws: int = Field(default=20_000, ge=1, description="Prior draws per training set")

    model_config = ConfigDict(extra="forbid")


class ExperimentConfig(BaseModel):
    replications: int = Field(default=5, ge=1, description="Replicates per design cell")

    model_config = ConfigDict(extra="forbid")


class BiasnetConfig(BaseModel):
    """Main configuration for biasnet."""

    threads: int = Field(default=1, ge=1, description="Worker processes / tree-growing threads")
    quantiles: list[float] = Field(
        default_factory=lambda: list(DEFAULT_QUANTILES), description="Reported posterior quantiles"
    )

    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    prior: PriorConfig = Field(default_factory=PriorConfig)
    forest: ForestSection = Field(default_factory=ForestSection)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)

    model_config = ConfigDict(extra="forbid")

    @field_validator("quantiles")
    @classmethod
    def _check_quantiles(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("at least one quantile level is required")
        if any(not 0.0 < q < 1.0 for q in v):
            raise ValueError("quantile levels must lie in (0, 1)")
        return sorted(set(v))


Command = Literal["simulate", "featurize", "train", "infer", "select-model", "experiment"]
ModelClassChoice = Literal["undichotomized", "dichotomized", "both"]


class RunConfig(BaseModel):
    """Fully resolved parameters of one subcommand invocation."""

    command: Command
    n: int | None = Field(default=None, ge=3, description="Graph order N")
    seed: int | None = Field(default=None, ge=0, description="Master seed")
    threads: int = Field(default=1, ge=1)
    burnin_multiplier: int = Field(default=500, ge=1)
    draws: int = Field(default=1, ge=1)
    model_class: ModelClassChoice = "undichotomized"
    parent: bool = True
    sibling: bool = True
    double_role: bool = True
    satiation: bool = True
    inputs: list[Path] = Field(default_factory=list, description="Input files or directories")
    output: Path | None = None

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_seed(self) -> "RunConfig":
        if self.command in ("train", "experiment") and self.seed is None:
            raise ValueError(f"{self.command} requires an explicit --seed")
        return self

    @property
    def burnin(self) -> int:
        if self.n is None:
            raise ValueError("graph order is not set")
        return self.burnin_multiplier * self.n * self.n

    def model_specs(self) -> list[ModelSpec]:
        if self.n is None:
            raise ValueError("graph order is not set")
        classes = (
            [False, True] if self.model_class == "both" else [self.model_class == "dichotomized"]
        )
        return [
            ModelSpec(
                n=self.n,
                dichotomized=dichotomized,
                parent=self.parent,
                sibling=self.sibling,
                double_role=self.double_role,
                satiation=self.satiation,
            )
            for dichotomized in classes
        ]
