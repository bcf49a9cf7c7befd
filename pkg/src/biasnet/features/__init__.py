"""Summary statistics of directed graphs."""

from biasnet.features.indices import (
    TRIAD_TYPES,
    cohesion_statistics,
    degree_statistics,
    graph_level_indices,
    simmelian_ties,
    singular_values,
    spectral_statistics,
    triad_census,
)
from biasnet.features.structure import LogisticFit, fit_5pl, logistic5, structure_statistics
from biasnet.features.vector import (
    FEATURE_NAMES,
    STRUCTURE_ALIASES,
    FeatureVector,
    feature_matrix,
    featurize,
    read_feature_csv,
    schema_hash,
    write_feature_csv,
)

__all__ = [
    "FEATURE_NAMES",
    "STRUCTURE_ALIASES",
    "TRIAD_TYPES",
    "FeatureVector",
    "LogisticFit",
    "cohesion_statistics",
    "degree_statistics",
    "feature_matrix",
    "featurize",
    "fit_5pl",
    "graph_level_indices",
    "logistic5",
    "read_feature_csv",
    "schema_hash",
    "simmelian_ties",
    "singular_values",
    "spectral_statistics",
    "structure_statistics",
    "triad_census",
    "write_feature_csv",
]
