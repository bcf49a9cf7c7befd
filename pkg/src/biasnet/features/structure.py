"""Structure statistics and their five-parameter logistic compression."""

from itertools import product
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import least_squares, minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from biasnet.errors import InvalidArgumentError
from biasnet.graph.digraph import DiGraph

logger = logging.getLogger(__name__)

# x = 0 is evaluated here so that (x / g3) ** g2 stays defined.
X_EPS = 1e-6

STEEPNESS_GRID = (0.5, 1.0, 2.0, 4.0)
SCALE_GRID = (1.0, 2.0, 5.0, 10.0, 20.0)
ASYMMETRY_GRID = (0.5, 1.0, 2.0)

# Local searches per fit, taken from the best-scoring grid members.
DEFAULT_LOCAL_STARTS = 8

# Log-parameters are clipped here to keep powers finite.
LOG_BOUND = 30.0


class LogisticFit(BaseModel):
    """Least-squares 5PL parameters for a structure-statistics curve."""

    gamma1: float = Field(description="Minimum (value at x -> 0)")
    gamma2: float = Field(gt=0, description="Initial steepness")
    gamma3: float = Field(gt=0, description="x-axis scale / inflection")
    gamma4: float = Field(description="Maximum (value at x -> inf)")
    gamma5: float = Field(gt=0, description="Asymmetry")
    rss: float = Field(ge=0, description="Residual sum of squares")
    fallback: bool = Field(default=False, description="Degenerate input; conventional values used")

    model_config = ConfigDict(extra="forbid", frozen=True)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return self.gamma1, self.gamma2, self.gamma3, self.gamma4, self.gamma5

    def predict(self, x: np.ndarray) -> np.ndarray:
        return logistic5(np.asarray(x, dtype=np.float64), *self.as_tuple())


def logistic5(x: np.ndarray, g1: float, g2: float, g3: float, g4: float, g5: float) -> np.ndarray:
    """g4 - (g4 - g1) / (1 + (x / g3) ** g2) ** g5."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return g4 - (g4 - g1) / (1.0 + (x / g3) ** g2) ** g5


def structure_statistics(g: DiGraph) -> np.ndarray:
    """Mean fraction of vertices within directed distance ``x`` of a seed, for x = 0..n-1."""
    dist = shortest_path(csr_matrix(g.adjacency.astype(np.int8)), directed=True, unweighted=True)
    finite = dist[np.isfinite(dist)].astype(np.int64)
    counts = np.bincount(finite, minlength=g.n)[: g.n]
    return np.cumsum(counts) / float(g.n * g.n)


def _x_grid(length: int) -> np.ndarray:
    x = np.arange(length, dtype=np.float64)
    x[0] = X_EPS
    return x


def _unpack(theta: np.ndarray) -> tuple[float, float, float, float, float]:
    g1, lg2, lg3, g4, lg5 = (float(v) for v in theta)

    def positive(v: float) -> float:
        return float(np.exp(np.clip(v, -LOG_BOUND, LOG_BOUND)))

    return g1, positive(lg2), positive(lg3), g4, positive(lg5)


def _residuals(theta: np.ndarray, x: np.ndarray, f: np.ndarray) -> np.ndarray:
    r = logistic5(x, *_unpack(theta)) - f
    return np.where(np.isfinite(r), r, 1e6)


def _rss(theta: np.ndarray, x: np.ndarray, f: np.ndarray) -> float:
    r = _residuals(theta, x, f)
    return float(r @ r)


def initialization_grid(f: np.ndarray) -> list[np.ndarray]:
    """Deterministic starting points in log-parameter space, in grid order."""
    return [
        np.array([f[0], np.log(g2), np.log(g3), f[-1], np.log(g5)])
        for g3, g2, g5 in product(SCALE_GRID, STEEPNESS_GRID, ASYMMETRY_GRID)
    ]


def _refine(theta: np.ndarray, x: np.ndarray, f: np.ndarray) -> list[np.ndarray]:
    """Nelder-Mead from ``theta`` and a Levenberg-Marquardt polish of its end point."""
    simplex = minimize(
        _rss,
        theta,
        args=(x, f),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-16, "maxfev": 2000},
    )
    polished = least_squares(
        _residuals, simplex.x, args=(x, f), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
        max_nfev=4000,
    )
    return [simplex.x, polished.x]


def fit_5pl(f: np.ndarray, local_starts: int | None = DEFAULT_LOCAL_STARTS) -> LogisticFit:
    """Fit the five-parameter logistic curve to ``f`` by least squares.

    The initialization grid is scored and the best ``local_starts`` members
    (every member when None) are refined by Nelder-Mead followed by a
    Levenberg-Marquardt polish. The fit is the lowest-RSS candidate with
    gamma1 <= gamma4, the best grid member included, so it never has a larger
    RSS than that member and a wider search never does worse than a narrower one.

    Raises:
        InvalidArgumentError: If ``f`` has fewer than five points or ``local_starts`` < 0.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.size < 5:
        raise InvalidArgumentError(f"5PL fit needs at least 5 points, got {f.size}")
    if local_starts is not None and local_starts < 0:
        raise InvalidArgumentError(f"local_starts must be non-negative, got {local_starts}")

    if np.ptp(f) <= 1e-15:
        logger.debug("Constant structure statistics; using fallback 5PL parameters")
        return LogisticFit(
            gamma1=float(f[0]), gamma2=1.0, gamma3=1.0, gamma4=float(f[0]), gamma5=1.0, rss=0.0,
            fallback=True,
        )

    x = _x_grid(f.size)
    starts = initialization_grid(f)
    scored = sorted(((_rss(t, x, f), k) for k, t in enumerate(starts)))
    # the grid member keeps its endpoints from F, so it is accepted even when F decreases
    best_rss, best_k = scored[0]
    best = starts[best_k]

    chosen = scored if local_starts is None else scored[:local_starts]
    for _, k in chosen:
        for candidate in _refine(starts[k], x, f):
            g1, _, _, g4, _ = _unpack(candidate)
            rss = _rss(candidate, x, f)
            if g1 <= g4 and rss < best_rss:
                best_rss, best = rss, candidate

    g1, g2, g3, g4, g5 = _unpack(best)
    return LogisticFit(gamma1=g1, gamma2=g2, gamma3=g3, gamma4=g4, gamma5=g5, rss=best_rss)
