"""Graph-level, triadic, degree, cohesion and spectral statistics."""

from math import comb

import networkx as nx
import numpy as np

from biasnet.errors import InvalidArgumentError
from biasnet.graph.digraph import DiGraph

TRIAD_TYPES: tuple[str, ...] = (
    "003",
    "012",
    "102",
    "021D",
    "021U",
    "021C",
    "111D",
    "111U",
    "030T",
    "030C",
    "201",
    "120D",
    "120U",
    "120C",
    "210",
    "300",
)

# Singular-value roots below this are treated as zero when forming ratios.
SPECTRAL_EPS = 1e-12


def to_networkx(g: DiGraph) -> nx.DiGraph:
    h = nx.DiGraph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def graph_level_indices(g: DiGraph) -> tuple[float, float, float]:
    """Density, edgewise reciprocity and transitivity.

    Empty premise sets are vacuously satisfied: reciprocity of an empty graph
    and transitivity without 2-paths are both 1.
    """
    a = g.as_int_matrix()
    n_edges = int(a.sum())
    den = g.density()

    recip = float((a * a.T).sum() / n_edges) if n_edges else 1.0

    two_paths = a @ a
    np.fill_diagonal(two_paths, 0)
    n_two_paths = int(two_paths.sum())
    trans = float((two_paths * a).sum() / n_two_paths) if n_two_paths else 1.0
    return den, recip, trans


def triad_census(g: DiGraph) -> np.ndarray:
    """Holland-Leinhardt census as fractions of all C(n, 3) triads, in ``TRIAD_TYPES`` order."""
    if g.n < 3:
        raise InvalidArgumentError(f"triad census needs at least 3 vertices, got {g.n}")
    census = nx.triadic_census(to_networkx(g))
    total = comb(g.n, 3)
    return np.array([census[name] / total for name in TRIAD_TYPES], dtype=np.float64)


def degree_statistics(g: DiGraph) -> tuple[float, float, float, float]:
    """Normalized mean square out/in-degree, mean in-out product, isolate fraction."""
    if g.n < 2:
        return 0.0, 0.0, 0.0, float(g.n_edges == 0)
    scale = float((g.n - 1) ** 2)
    od = g.outdeg.astype(np.float64)
    idg = g.indeg.astype(np.float64)
    return (
        float(np.mean(od**2) / scale),
        float(np.mean(idg**2) / scale),
        float(np.mean(od * idg) / scale),
        float(np.mean((g.outdeg == 0) & (g.indeg == 0))),
    )


def simmelian_ties(g: DiGraph) -> np.ndarray:
    """Boolean matrix of mutual ties embedded in at least one fully mutual triangle."""
    mutual = (g.adjacency & g.adjacency.T).astype(np.int64)
    common = mutual @ mutual
    return (mutual > 0) & (common > 0)


def cohesion_statistics(g: DiGraph) -> tuple[float, float, float]:
    """Simmelian tie density and mean / population sd of total-degree core numbers."""
    simm_den = float(simmelian_ties(g).sum() / (g.n * (g.n - 1))) if g.n > 1 else 0.0
    cores = np.array(list(nx.core_number(to_networkx(g)).values()), dtype=np.float64)
    return simm_den, float(cores.mean()), float(cores.std())


def singular_values(g: DiGraph) -> np.ndarray:
    return np.linalg.svd(g.adjacency.astype(np.float64), compute_uv=False)


def spectral_statistics(g: DiGraph) -> tuple[float, float, float, float]:
    """Successive ratios of the square-rooted singular values and the share above 1/n."""
    roots = np.sqrt(np.clip(singular_values(g), 0.0, None))
    ratios = []
    for k in range(3):
        if k + 1 < roots.size and roots[k] >= SPECTRAL_EPS:
            ratios.append(float(roots[k + 1] / roots[k]))
        else:
            ratios.append(0.0)
    frac_large = float(np.count_nonzero(roots > 1.0 / g.n) / g.n)
    return ratios[0], ratios[1], ratios[2], frac_large
