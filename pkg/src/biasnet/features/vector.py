"""The summary-statistic vector and its CSV form."""

from collections.abc import Sequence
import hashlib
from pathlib import Path

import numpy as np
import pandas as pd

from biasnet.errors import InvalidArgumentError, SchemaMismatchError
from biasnet.features.indices import (
    TRIAD_TYPES,
    cohesion_statistics,
    degree_statistics,
    graph_level_indices,
    spectral_statistics,
    triad_census,
)
from biasnet.features.structure import fit_5pl, structure_statistics
from biasnet.graph.digraph import DiGraph

FEATURE_NAMES: tuple[str, ...] = (
    "Den",
    "EdgeRecip",
    "Trans",
    *(f"T{name}" for name in TRIAD_TYPES),
    "NMeanSqOD",
    "NMeanSqID",
    "NMeanIODProd",
    "FracIsol",
    "SSMin",
    "SSSteep",
    "SSScale",
    "SSMax",
    "SSAsym",
    "SimmDen",
    "MeanCore",
    "SDCore",
    "SV2v1",
    "SV3v2",
    "SV4v3",
    "SVFrLg",
)

#: Positional names of the five logistic-fit columns, accepted when reading feature CSVs.
STRUCTURE_ALIASES: dict[str, str] = {
    "SS1": "SSMin",
    "SS2": "SSSteep",
    "SS3": "SSScale",
    "SS4": "SSMax",
    "SS5": "SSAsym",
}

SOURCE_COLUMN = "source"
# The structure curve needs one point per distance for the five-parameter fit.
MIN_ORDER = 5


def schema_hash(names: Sequence[str] = FEATURE_NAMES) -> str:
    """Short fingerprint of an ordered feature schema."""
    return hashlib.sha256(",".join(names).encode("utf-8")).hexdigest()[:16]


class FeatureVector:
    """Summary statistics of one graph in ``FEATURE_NAMES`` order."""

    __slots__ = ("structure_fallback", "values")

    def __init__(self, values: np.ndarray, structure_fallback: bool = False):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(FEATURE_NAMES),):
            raise InvalidArgumentError(
                f"expected {len(FEATURE_NAMES)} feature values, got shape {values.shape}"
            )
        self.values = values
        self.structure_fallback = structure_fallback

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist(), strict=True))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}={v:.4g}" for k, v in list(self.as_dict().items())[:4])
        return f"FeatureVector({shown}, ...)"


def featurize(g: DiGraph) -> FeatureVector:
    """Compute every summary statistic of ``g``."""
    if g.n < MIN_ORDER:
        raise InvalidArgumentError(f"featurize needs at least {MIN_ORDER} vertices, got {g.n}")
    fit = fit_5pl(structure_statistics(g))
    values = np.concatenate(
        [
            graph_level_indices(g),
            triad_census(g),
            degree_statistics(g),
            fit.as_tuple(),
            cohesion_statistics(g),
            spectral_statistics(g),
        ]
    )
    return FeatureVector(values, structure_fallback=fit.fallback)


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.vstack([v.values for v in vectors])


def write_feature_csv(
    path: Path, matrix: np.ndarray, sources: Sequence[str] | None = None
) -> None:
    """Write one row per graph with the schema names as header."""
    frame = pd.DataFrame(np.asarray(matrix, dtype=np.float64), columns=list(FEATURE_NAMES))
    if sources is not None:
        frame.insert(0, SOURCE_COLUMN, list(sources))
    frame.to_csv(path, index=False, float_format="%.17g")


def read_feature_csv(path: Path) -> tuple[np.ndarray, list[str] | None]:
    """Read a feature CSV, checking its header against the schema.

    Headers may use SS1..SS5 for the structure columns (see ``STRUCTURE_ALIASES``).

    Raises:
        SchemaMismatchError: If the columns differ from ``FEATURE_NAMES``.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    sources = None
    if SOURCE_COLUMN in frame.columns:
        sources = frame.pop(SOURCE_COLUMN).astype(str).tolist()
    frame = frame.rename(columns=STRUCTURE_ALIASES)
    if tuple(frame.columns) != FEATURE_NAMES:
        raise SchemaMismatchError(f"feature columns in {path} do not match the schema")
    return frame.to_numpy(dtype=np.float64), sources
