"""Random forests: regression, quantile regression and classification."""

from biasnet.forest.forest import Forest, ImportanceResult, TreeArrays, train
from biasnet.forest.models import ForestConfig, ForestTask
from biasnet.forest.persistence import (
    FORMAT_VERSION,
    MAGIC,
    forest_from_bytes,
    forest_to_bytes,
    load_forest,
    read_header,
    save_forest,
)

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "Forest",
    "ForestConfig",
    "ForestTask",
    "ImportanceResult",
    "TreeArrays",
    "forest_from_bytes",
    "forest_to_bytes",
    "load_forest",
    "read_header",
    "save_forest",
    "train",
]
