"""Contradictory marginals implied by the conditional biased net specification.

For a three-vertex digraph with edges {(i,j), (i,k), (j,k)} under a baseline plus
sibling model, the full conditionals imply two different values for
``Pr(Y_jk = 1 | rest)`` depending on which pair of conditionals is chained.
"""

from biasnet.errors import InvalidArgumentError


def illposed_marginals(d: float, sigma: float) -> tuple[float, float]:
    """Return the two incompatible marginals ``(m1, m2)``; they agree only when sigma is 0."""
    if not 0.0 < d < 1.0:
        raise InvalidArgumentError(f"d must lie in (0, 1), got {d}")
    if not 0.0 <= sigma < 1.0:
        raise InvalidArgumentError(f"sigma must lie in [0, 1), got {sigma}")
    m2 = d + sigma - d * sigma
    m1 = d * m2 / (d + sigma * (1.0 - d) ** 2)
    return m1, m2
