"""Bias-event statistics and the edge update probability."""

import math

from numba import njit
import numpy as np

from biasnet.engine.models import EventCounts, ModelSpec, ParamVector
from biasnet.errors import InvalidArgumentError
from biasnet.graph.digraph import DiGraph

# Above this count, products are accumulated in log space.
LOG_SPACE_THRESHOLD = 64


@njit(cache=True, nogil=True)
def _edge_probability(t_parent, t_sibling, t_droles, w_satiation, pi, sigma, rho, d, delta):
    """(1-delta)^w * [1 - (1-d)(1-pi)^tp (1-sigma)^ts (1-rho)^tr]."""
    if (
        t_parent > LOG_SPACE_THRESHOLD
        or t_sibling > LOG_SPACE_THRESHOLD
        or t_droles > LOG_SPACE_THRESHOLD
        or w_satiation > LOG_SPACE_THRESHOLD
    ):
        # zero counts are skipped so that 0 * log(0) never appears
        log_fail = math.log1p(-d) if d < 1.0 else -math.inf
        if t_parent > 0:
            log_fail += t_parent * (math.log1p(-pi) if pi < 1.0 else -math.inf)
        if t_sibling > 0:
            log_fail += t_sibling * (math.log1p(-sigma) if sigma < 1.0 else -math.inf)
        if t_droles > 0:
            log_fail += t_droles * (math.log1p(-rho) if rho < 1.0 else -math.inf)
        formation = -math.expm1(log_fail)
        if w_satiation > 0:
            if delta >= 1.0:
                return 0.0
            return formation * math.exp(w_satiation * math.log1p(-delta))
        return formation

    fail = (1.0 - d) * (1.0 - pi) ** t_parent * (1.0 - sigma) ** t_sibling * (1.0 - rho) ** t_droles
    return (1.0 - delta) ** w_satiation * (1.0 - fail)


def event_counts(g: DiGraph, i: int, j: int, spec: ModelSpec) -> EventCounts:
    """Potential bias events for the focal pair ``(i, j)`` with that edge itself excluded.

    Inactive terms in ``spec`` are reported as zero counts.
    """
    if i == j:
        raise InvalidArgumentError(f"focal pair must be distinct, got ({i}, {j})")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise InvalidArgumentError(f"focal pair ({i}, {j}) out of range for n={g.n}")

    a = g.adjacency
    t_parent = int(a[j, i])

    shared = a[:, i] & a[:, j]
    shared[i] = False
    shared[j] = False
    t_sibling = int(np.count_nonzero(shared))
    if spec.dichotomized:
        t_sibling = min(1, t_sibling)

    w = int(g.outdeg[i]) - int(a[i, j])

    return EventCounts(
        t_parent=t_parent if spec.parent else 0,
        t_sibling=t_sibling if spec.sibling else 0,
        t_droles=t_parent * t_sibling if spec.double_role else 0,
        w_satiation=w if spec.satiation else 0,
    )


def update_probability(counts: EventCounts, psi: ParamVector) -> float:
    """Probability that at least one formation event fires while every inhibitory event fails."""
    return float(
        _edge_probability(
            counts.t_parent,
            counts.t_sibling,
            counts.t_droles,
            counts.w_satiation,
            psi.pi,
            psi.sigma,
            psi.rho,
            psi.d,
            psi.delta,
        )
    )
