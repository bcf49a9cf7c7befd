"""Random forest configuration."""

from enum import Enum
import math

from pydantic import BaseModel, ConfigDict, Field

from biasnet.errors import InvalidArgumentError


class ForestTask(str, Enum):
    """What the leaves of a forest carry."""

    REGRESSION = "regression"
    QUANTILE = "quantile"
    CLASSIFICATION = "classification"


class ForestConfig(BaseModel):
    """Forest hyperparameters; unset values take the task's default."""

    n_trees: int = Field(default=500, ge=1, description="Number of trees")
    mtry: int | None = Field(
        default=None, ge=1, description="Candidate features per split (default floor(sqrt(p)))"
    )
    min_node_size: int | None = Field(
        default=None, ge=1, description="Minimum leaf size (default 10, or 1 for classification)"
    )
    max_depth: int | None = Field(default=None, ge=1, description="Maximum depth (unlimited)")
    seed: int = Field(default=0, ge=0, description="Forest seed; tree t uses substream (seed, t)")
    task: ForestTask = Field(default=ForestTask.REGRESSION, description="Leaf payload kind")

    model_config = ConfigDict(extra="forbid", frozen=True)

    def resolved_mtry(self, p: int) -> int:
        mtry = self.mtry if self.mtry is not None else max(1, math.isqrt(p))
        if not 1 <= mtry <= p:
            raise InvalidArgumentError(f"mtry must lie in 1..{p}, got {mtry}")
        return mtry

    def resolved_min_node_size(self) -> int:
        if self.min_node_size is not None:
            return self.min_node_size
        return 1 if self.task == ForestTask.CLASSIFICATION else 10
