"""Markov chain simulation of the biased net process.

At each step one ordered pair ``(i, j)`` is drawn uniformly and its state is
*set* to 1 with the update probability, else 0; an existing edge that does not
re-fire is removed.
"""

import logging

from numba import njit
import numpy as np

from biasnet.engine.events import _edge_probability
from biasnet.engine.models import ModelSpec, ParamVector
from biasnet.errors import AbsorbingStateError, InvalidArgumentError
from biasnet.graph.digraph import DiGraph

logger = logging.getLogger(__name__)

# Steps whose random numbers are drawn together.
CHUNK_STEPS = 1 << 20


@njit(cache=True, nogil=True)
def _run_chain(
    adjacency,
    outdeg,
    indeg,
    pair_codes,
    uniforms,
    params,
    dichotomized,
    use_parent,
    use_sibling,
    use_droles,
    use_satiation,
):
    n = adjacency.shape[0]
    pi, sigma, rho, d, delta = params[0], params[1], params[2], params[3], params[4]
    need_shared = use_sibling or use_droles

    for step in range(pair_codes.shape[0]):
        code = pair_codes[step]
        i = code // (n - 1)
        r = code % (n - 1)
        j = r if r < i else r + 1

        tp = 1 if adjacency[j, i] else 0
        ts = 0
        if need_shared:
            for k in range(n):
                if k != i and k != j and adjacency[k, i] and adjacency[k, j]:
                    ts += 1
                    if dichotomized:
                        break

        t_parent = tp if use_parent else 0
        t_sibling = ts if use_sibling else 0
        t_droles = tp * ts if use_droles else 0
        current = adjacency[i, j]
        w = 0
        if use_satiation:
            w = outdeg[i] - (1 if current else 0)

        p = _edge_probability(t_parent, t_sibling, t_droles, w, pi, sigma, rho, d, delta)
        present = uniforms[step] < p

        if present != current:
            adjacency[i, j] = present
            delta_deg = 1 if present else -1
            outdeg[i] += delta_deg
            indeg[j] += delta_deg


def _apply_steps(
    g: DiGraph, psi: ParamVector, spec: ModelSpec, pair_codes: np.ndarray, uniforms: np.ndarray
) -> None:
    _run_chain(
        g.adjacency,
        g.outdeg,
        g.indeg,
        pair_codes,
        uniforms,
        psi.as_array(),
        spec.dichotomized,
        spec.parent,
        spec.sibling,
        spec.double_role,
        spec.satiation,
    )


def decode_pair(code: int, n: int) -> tuple[int, int]:
    """Map a code in ``[0, n(n-1))`` to the ordered pair it indexes."""
    i, r = divmod(int(code), n - 1)
    return i, (r if r < i else r + 1)


def sfbn_step(g: DiGraph, psi: ParamVector, spec: ModelSpec, rng: np.random.Generator) -> DiGraph:
    """Apply one update to ``g`` in place and return it."""
    if g.n != spec.n:
        raise InvalidArgumentError(f"graph order {g.n} does not match model order {spec.n}")
    pair_codes = rng.integers(0, g.n * (g.n - 1), size=1, dtype=np.int64)
    uniforms = rng.random(1)
    _apply_steps(g, psi, spec, pair_codes, uniforms)
    return g


def sfbn_sample(
    psi: ParamVector,
    spec: ModelSpec,
    burnin: int,
    rng: np.random.Generator,
    initial: DiGraph | None = None,
) -> DiGraph:
    """Run the chain for exactly ``burnin`` steps and return the final state.

    Args:
        psi: Bias-event probabilities
        spec: Active terms, dichotomization and graph order
        burnin: Number of steps
        rng: Generator owned by this chain
        initial: Starting graph (default: empty); it is not modified

    Raises:
        AbsorbingStateError: If d is 0 and the chain starts from the empty graph.
    """
    if burnin < 0:
        raise InvalidArgumentError(f"burn-in must be non-negative, got {burnin}")
    g = DiGraph(spec.n) if initial is None else initial.copy()
    if g.n != spec.n:
        raise InvalidArgumentError(f"initial graph order {g.n} does not match model order {spec.n}")
    if psi.d <= 0.0 and g.n_edges == 0:
        raise AbsorbingStateError("d = 0 makes the empty graph an absorbing state")

    n_pairs = spec.n * (spec.n - 1)
    done = 0
    while done < burnin:
        m = min(CHUNK_STEPS, burnin - done)
        pair_codes = rng.integers(0, n_pairs, size=m, dtype=np.int64)
        uniforms = rng.random(m)
        _apply_steps(g, psi, spec, pair_codes, uniforms)
        done += m

    logger.debug(f"Chain finished after {burnin:,} steps with {g.n_edges} edges")
    return g


def burnin_steps(n: int, multiplier: int = 500) -> int:
    """Burn-in expressed as ``multiplier * n**2`` steps."""
    return int(multiplier) * n * n
