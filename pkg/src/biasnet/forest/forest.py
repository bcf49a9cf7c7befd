"""Bagged decision-tree forests for regression, quantile regression and classification.

Trees are grown by scikit-learn on explicit bootstrap resamples and then
flattened into plain arrays; prediction, out-of-bag bookkeeping, quantile
weights and permutation importance all work on those arrays.
"""

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging

import numpy as np
from sklearn.tree import DecisionTreeClassifier, DecisionTreeRegressor

from biasnet.engine.rng import substream
from biasnet.errors import InvalidArgumentError
from biasnet.forest.models import ForestConfig, ForestTask

logger = logging.getLogger(__name__)

LEAF = -1

# Query rows per block of dense quantile weights.
QUANTILE_CHUNK_ROWS = 256


@dataclass
class TreeArrays:
    """One tree: child indices (``LEAF`` for leaves), split feature/threshold, leaf payload."""

    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray  # (n_nodes,) means or (n_nodes, n_classes) vote shares

    @property
    def n_nodes(self) -> int:
        return int(self.left.size)

    def apply(self, x32: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``x32``."""
        node = np.zeros(x32.shape[0], dtype=np.int64)
        active = np.nonzero(self.left[node] != LEAF)[0]
        while active.size:
            current = node[active]
            go_left = x32[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.left[node[active]] != LEAF]
        return node


@dataclass
class ImportanceResult:
    """Permutation importance per feature with its standard error across trees."""

    feature_names: list[str]
    scores: np.ndarray
    standard_errors: np.ndarray

    def ranked(self) -> list[tuple[str, float]]:
        order = sorted(range(len(self.scores)), key=lambda k: (-self.scores[k], k))
        return [(self.feature_names[k], float(self.scores[k])) for k in order]


def _flatten(estimator, n_classes: int) -> TreeArrays:
    tree = estimator.tree_
    if n_classes:
        raw = tree.value[:, 0, :].astype(np.float64)
        value = np.zeros((tree.node_count, n_classes))
        value[:, estimator.classes_.astype(np.int64)] = raw
        totals = value.sum(axis=1, keepdims=True)
        value = np.divide(value, totals, out=np.zeros_like(value), where=totals > 0)
    else:
        value = tree.value[:, 0, 0].astype(np.float64)
    return TreeArrays(
        left=tree.children_left.astype(np.int32),
        right=tree.children_right.astype(np.int32),
        feature=np.maximum(tree.feature, 0).astype(np.int32),
        threshold=tree.threshold.astype(np.float64),
        value=value,
    )


class Forest:
    """A trained forest plus the bookkeeping needed for OOB error, quantiles and importance."""

    def __init__(
        self,
        config: ForestConfig,
        feature_names: Sequence[str],
        trees: list[TreeArrays],
        oob_mask: np.ndarray,
        train_x: np.ndarray | None = None,
        train_y: np.ndarray | None = None,
        classes: np.ndarray | None = None,
    ):
        self.config = config
        self.feature_names = list(feature_names)
        self.trees = trees
        self.oob_mask = oob_mask
        self.train_x = train_x
        self.train_y = train_y
        self.classes = classes
        self._quantile_index: list[tuple[np.ndarray, np.ndarray]] | None = None

    @property
    def task(self) -> ForestTask:
        return self.config.task

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check_rows(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != len(self.feature_names):
            raise InvalidArgumentError(
                f"expected rows of {len(self.feature_names)} features, got shape {x.shape}"
            )
        return x.astype(np.float32)

    def tree_predictions(self, tree: TreeArrays, x32: np.ndarray) -> np.ndarray:
        return tree.value[tree.apply(x32)]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Mean of leaf means (regression) or of leaf vote shares (classification).

        A single row returns a scalar-shaped result for regression and a
        probability vector for classification.
        """
        single = np.asarray(x).ndim == 1
        x32 = self._check_rows(x)
        total = sum(self.tree_predictions(t, x32) for t in self.trees) / self.n_trees
        return total[0] if single else total

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        if self.task != ForestTask.CLASSIFICATION:
            raise InvalidArgumentError("class probabilities need a classification forest")
        return self.predict(x)

    def _build_quantile_index(self) -> list[tuple[np.ndarray, np.ndarray]]:
        if self._quantile_index is None:
            if self.train_x is None:
                raise InvalidArgumentError("quantile prediction needs a quantile forest")
            index = []
            for tree in self.trees:
                leaves = tree.apply(self.train_x)
                order = np.argsort(leaves, kind="stable")
                index.append((leaves[order], order))
            self._quantile_index = index
        return self._quantile_index

    def quantile_weights(self, x: np.ndarray) -> np.ndarray:
        """Per-query weights on training rows from leaf co-membership, averaged over trees."""
        x32 = self._check_rows(x)
        index = self._build_quantile_index()
        n_train = self.train_x.shape[0]  # type: ignore[union-attr]
        weights = np.zeros((x32.shape[0], n_train))
        for tree, (sorted_leaves, rows) in zip(self.trees, index, strict=True):
            query_leaves = tree.apply(x32)
            lo = np.searchsorted(sorted_leaves, query_leaves, side="left")
            hi = np.searchsorted(sorted_leaves, query_leaves, side="right")
            for q in range(x32.shape[0]):
                members = rows[lo[q] : hi[q]]
                weights[q, members] += 1.0 / members.size
        return weights / self.n_trees

    def predict_quantiles(self, x: np.ndarray, levels: Sequence[float]) -> np.ndarray:
        """Weighted empirical quantiles of the training responses, shape (rows, levels).

        Weights are built ``QUANTILE_CHUNK_ROWS`` query rows at a time, so memory
        stays at that many rows times the training size.
        """
        if self.task != ForestTask.QUANTILE:
            raise InvalidArgumentError("quantile prediction needs a quantile forest")
        for q in levels:
            if not 0.0 < q < 1.0:
                raise InvalidArgumentError(f"quantile level must lie in (0, 1), got {q}")
        x32 = self._check_rows(x)
        order = np.argsort(self.train_y, kind="stable")  # type: ignore[arg-type]
        y_sorted = self.train_y[order]  # type: ignore[index]
        out = np.empty((x32.shape[0], len(levels)))
        for start in range(0, x32.shape[0], QUANTILE_CHUNK_ROWS):
            weights = self.quantile_weights(x32[start : start + QUANTILE_CHUNK_ROWS])
            for r in range(weights.shape[0]):
                cdf = np.cumsum(weights[r, order])
                total = cdf[-1]
                for c, q in enumerate(levels):
                    k = int(np.searchsorted(cdf, q * total - 1e-12 * total, side="left"))
                    out[start + r, c] = y_sorted[min(k, y_sorted.size - 1)]
        return out

    def predict_quantile(self, x: np.ndarray, q: float) -> float | np.ndarray:
        result = self.predict_quantiles(x, [q])[:, 0]
        return float(result[0]) if np.asarray(x).ndim == 1 else result

    def _tree_error(self, tree: TreeArrays, x32: np.ndarray, y: np.ndarray) -> float:
        pred = self.tree_predictions(tree, x32)
        if self.task == ForestTask.CLASSIFICATION:
            return float(np.mean(np.argmax(pred, axis=1) != y))
        return float(np.mean((pred - y) ** 2))

    def oob_predictions(self, x: np.ndarray) -> np.ndarray:
        """Average over trees for which each training row was out of bag (NaN if never)."""
        x32 = self._check_rows(x)
        width = len(self.classes) if self.classes is not None else None
        shape = (x32.shape[0], width) if width else (x32.shape[0],)
        total = np.zeros(shape)
        count = np.zeros(x32.shape[0])
        for t, tree in enumerate(self.trees):
            oob = np.nonzero(self.oob_mask[t])[0]
            if oob.size == 0:
                continue
            total[oob] += self.tree_predictions(tree, x32[oob])
            count[oob] += 1
        with np.errstate(invalid="ignore", divide="ignore"):
            if width:
                return total / count[:, None]
            return total / count

    def oob_error(self, x: np.ndarray, y: np.ndarray) -> float:
        """OOB mean squared error, or misclassification rate for classifiers."""
        pred = self.oob_predictions(x)
        y = self._encode(y)
        if self.task == ForestTask.CLASSIFICATION:
            seen = ~np.isnan(pred).any(axis=1)
            return float(np.mean(np.argmax(pred[seen], axis=1) != y[seen]))
        seen = ~np.isnan(pred)
        return float(np.mean((pred[seen] - y[seen]) ** 2))

    def _encode(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y)
        if self.classes is None:
            return y.astype(np.float64)
        return np.searchsorted(self.classes, y)

    def importance(self, x: np.ndarray, y: np.ndarray) -> ImportanceResult:
        """Permutation importance: mean over trees of OOB error increase after permuting a feature."""
        x32 = self._check_rows(x)
        y = self._encode(y)
        p = x32.shape[1]
        increases: list[np.ndarray] = []
        for t, tree in enumerate(self.trees):
            oob = np.nonzero(self.oob_mask[t])[0]
            if oob.size < 2:
                continue
            rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, t, 1]))
            x_oob = x32[oob]
            baseline = self._tree_error(tree, x_oob, y[oob])
            row = np.empty(p)
            for j in range(p):
                permuted = x_oob.copy()
                permuted[:, j] = rng.permutation(permuted[:, j])
                row[j] = self._tree_error(tree, permuted, y[oob]) - baseline
            increases.append(row)
        if not increases:
            zeros = np.zeros(p)
            return ImportanceResult(self.feature_names, zeros, zeros.copy())
        table = np.vstack(increases)
        se = table.std(axis=0, ddof=1) / np.sqrt(table.shape[0]) if table.shape[0] > 1 else np.zeros(p)
        return ImportanceResult(self.feature_names, table.mean(axis=0), se)


def train(
    x: np.ndarray,
    y: np.ndarray,
    config: ForestConfig,
    feature_names: Sequence[str] | None = None,
    threads: int = 1,
) -> Forest:
    """Grow a forest; the result depends only on (x, y, config), never on ``threads``.

    Raises:
        InvalidArgumentError: On shape mismatches, fewer than two rows, or missing values.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"x rows and y length differ: {x.shape} vs {y.shape}")
    if x.shape[0] < 2:
        raise InvalidArgumentError("training needs at least two rows")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("feature matrix contains missing or non-finite values")
    names = list(feature_names) if feature_names is not None else [f"x{k}" for k in range(x.shape[1])]
    if len(names) != x.shape[1]:
        raise InvalidArgumentError("feature_names length does not match the number of columns")

    n, p = x.shape
    mtry = config.resolved_mtry(p)
    min_node = config.resolved_min_node_size()
    classifier = config.task == ForestTask.CLASSIFICATION
    x32 = x.astype(np.float32)

    classes: np.ndarray | None = None
    if classifier:
        classes, y_fit = np.unique(y, return_inverse=True)
        n_classes = len(classes)
    else:
        y_fit = y.astype(np.float64)
        if not np.all(np.isfinite(y_fit)):
            raise InvalidArgumentError("response contains missing or non-finite values")
        n_classes = 0

    def grow(t: int) -> tuple[TreeArrays, np.ndarray]:
        rng = substream(config.seed, t)
        rows = rng.integers(0, n, size=n)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        grower_cls = DecisionTreeClassifier if classifier else DecisionTreeRegressor
        grower = grower_cls(
            criterion="gini" if classifier else "squared_error",
            max_features=mtry,
            min_samples_leaf=min_node,
            max_depth=config.max_depth,
            random_state=tree_seed,
        )
        grower.fit(x32[rows], y_fit[rows])
        in_bag = np.zeros(n, dtype=bool)
        in_bag[rows] = True
        return _flatten(grower, n_classes), ~in_bag

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            grown = list(pool.map(grow, range(config.n_trees)))
    else:
        grown = [grow(t) for t in range(config.n_trees)]

    logger.debug(f"Grew {config.n_trees} {config.task.value} trees on {n} rows x {p} features")
    keep_training = config.task == ForestTask.QUANTILE
    return Forest(
        config=config,
        feature_names=names,
        trees=[tree for tree, _ in grown],
        oob_mask=np.vstack([mask for _, mask in grown]),
        train_x=x32 if keep_training else None,
        train_y=y_fit if keep_training else None,
        classes=classes,
    )
