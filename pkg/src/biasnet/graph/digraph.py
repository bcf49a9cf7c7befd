"""Dense directed-graph state and valued edge lists."""

from collections.abc import Iterable, Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from biasnet.errors import InvalidArgumentError


class DiGraph:
    """Loopless directed graph on vertices ``0..n-1``.

    Adjacency is a dense boolean matrix so that edge tests are O(1); in- and
    out-degree counters are kept in step with every toggle.
    """

    __slots__ = ("adjacency", "indeg", "n", "outdeg")

    def __init__(self, n: int):
        if n < 1:
            raise InvalidArgumentError(f"graph order must be positive, got {n}")
        self.n = int(n)
        self.adjacency = np.zeros((self.n, self.n), dtype=np.bool_)
        self.outdeg = np.zeros(self.n, dtype=np.int64)
        self.indeg = np.zeros(self.n, dtype=np.int64)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DiGraph":
        """Build a graph from an iterable of ordered pairs."""
        g = cls(n)
        for i, j in edges:
            g.toggle_edge(i, j, True)
        return g

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray) -> "DiGraph":
        """Build a graph from a square 0/1 matrix; the diagonal must be empty."""
        a = np.asarray(adjacency).astype(np.bool_)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgumentError(f"adjacency must be square, got shape {a.shape}")
        if a.diagonal().any():
            raise InvalidArgumentError("adjacency has self-loops")
        g = cls(a.shape[0])
        g.adjacency[:] = a
        g.recount()
        return g

    @classmethod
    def complete(cls, n: int) -> "DiGraph":
        """Complete loopless digraph of order ``n``."""
        return cls.from_adjacency(~np.eye(n, dtype=np.bool_))

    def _check_pair(self, i: int, j: int) -> None:
        if i == j:
            raise InvalidArgumentError(f"self-loop ({i}, {j}) is not allowed")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise InvalidArgumentError(f"vertex pair ({i}, {j}) out of range for n={self.n}")

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def toggle_edge(self, i: int, j: int, present: bool) -> "DiGraph":
        """Set the state of edge ``(i, j)`` and update the degree caches.

        Mutates in place and returns the graph for chaining.
        """
        self._check_pair(i, j)
        current = bool(self.adjacency[i, j])
        if current != present:
            self.adjacency[i, j] = present
            step = 1 if present else -1
            self.outdeg[i] += step
            self.indeg[j] += step
        return self

    def recount(self) -> None:
        """Recompute the degree caches from the adjacency matrix."""
        self.outdeg = self.adjacency.sum(axis=1).astype(np.int64)
        self.indeg = self.adjacency.sum(axis=0).astype(np.int64)

    def degrees_consistent(self) -> bool:
        """True when the cached degrees match a full recount."""
        return bool(
            np.array_equal(self.outdeg, self.adjacency.sum(axis=1))
            and np.array_equal(self.indeg, self.adjacency.sum(axis=0))
        )

    @property
    def n_edges(self) -> int:
        return int(self.outdeg.sum())

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return self.n_edges / (self.n * (self.n - 1))

    def edges(self) -> Iterator[tuple[int, int]]:
        """Ordered pairs present, in row-major order."""
        for i, j in zip(*np.nonzero(self.adjacency), strict=True):
            yield int(i), int(j)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def copy(self) -> "DiGraph":
        g = DiGraph(self.n)
        g.adjacency = self.adjacency.copy()
        g.outdeg = self.outdeg.copy()
        g.indeg = self.indeg.copy()
        return g

    def relabel(self, permutation: np.ndarray | list[int]) -> "DiGraph":
        """Return the graph with vertex ``v`` renamed to ``permutation[v]``."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise InvalidArgumentError("relabeling must be a permutation of 0..n-1")
        a = np.zeros_like(self.adjacency)
        a[np.ix_(perm, perm)] = self.adjacency
        return DiGraph.from_adjacency(a)

    def as_int_matrix(self) -> np.ndarray:
        return self.adjacency.astype(np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiGraph):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.adjacency, other.adjacency))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, edges={self.n_edges})"


def dyad_census(g: DiGraph) -> tuple[int, int, int]:
    """Counts of mutual, asymmetric and null unordered dyads."""
    a = g.adjacency
    upper = np.triu_indices(g.n, k=1)
    forward = a[upper]
    backward = a.T[upper]
    mutual = int(np.sum(forward & backward))
    asymmetric = int(np.sum(forward ^ backward))
    null = len(forward) - mutual - asymmetric
    return mutual, asymmetric, null


class ValuedEdgeList(BaseModel):
    """Strength-valued directed edges on ``n`` vertices."""

    n: int = Field(ge=1, description="Vertex count")
    entries: list[tuple[int, int, int]] = Field(
        default_factory=list, description="(i, j, strength) triples"
    )
    levels: int | None = Field(
        default=None, ge=1, description="Declared number of strength levels (default: max strength)"
    )

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_entries(self) -> "ValuedEdgeList":
        seen: set[tuple[int, int]] = set()
        for i, j, s in self.entries:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j})")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"vertex pair ({i}, {j}) out of range for n={self.n}")
            if s < 1:
                raise ValueError(f"strength must be a positive integer, got {s}")
            if self.levels is not None and s > self.levels:
                raise ValueError(f"strength {s} exceeds declared levels {self.levels}")
            if (i, j) in seen:
                raise ValueError(f"duplicate ordered pair ({i}, {j})")
            seen.add((i, j))
        return self

    @property
    def max_level(self) -> int:
        if self.levels is not None:
            return self.levels
        return max((s for _, _, s in self.entries), default=1)

    def canonical(self) -> "ValuedEdgeList":
        """Copy with entries sorted by (i, j)."""
        return self.model_copy(update={"entries": sorted(self.entries)})

    @classmethod
    def from_graph(cls, g: DiGraph) -> "ValuedEdgeList":
        return cls(n=g.n, entries=[(i, j, 1) for i, j in g.edges()])


def threshold(v: ValuedEdgeList, s: int) -> DiGraph:
    """Binary network of ties whose strength is at least ``s``.

    Thresholds are nested: the graph at ``s + 1`` is a subgraph of the one at ``s``.
    """
    if not 1 <= s <= v.max_level:
        raise InvalidArgumentError(f"threshold level {s} outside 1..{v.max_level}")
    return DiGraph.from_edges(v.n, ((i, j) for i, j, strength in v.entries if strength >= s))
