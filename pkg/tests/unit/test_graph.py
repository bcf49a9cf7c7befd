"""Unit tests for the graph representation and edge-list IO."""

import numpy as np
import pytest

from biasnet.errors import EdgeListParseError, InvalidArgumentError
from biasnet.graph import (
    DiGraph,
    ValuedEdgeList,
    dyad_census,
    read_edge_list,
    read_graph_file,
    threshold,
    write_edge_list,
    write_graph_file,
)


@pytest.mark.unit
class TestDiGraph:
    """Test edge toggles and degree bookkeeping."""

    def test_single_edge_updates_degrees(self):
        """Setting (0, 1) bumps outdeg[0] and indeg[1]."""
        g = DiGraph(3).toggle_edge(0, 1, True)

        assert g.outdeg.tolist() == [1, 0, 0]
        assert g.indeg.tolist() == [0, 1, 0]
        assert g.has_edge(0, 1)
        assert not g.has_edge(1, 0)

    def test_setting_twice_is_idempotent(self):
        """Setting an edge that is already present changes nothing."""
        once = DiGraph(3).toggle_edge(0, 1, True)
        twice = once.copy().toggle_edge(0, 1, True)

        assert once == twice
        assert twice.n_edges == 1

    def test_random_toggles_keep_degree_caches(self, rng):
        """Degree caches match a full recount after 1000 random toggles."""
        g = DiGraph(10)
        for _ in range(1000):
            i, j = rng.choice(10, size=2, replace=False)
            g.toggle_edge(int(i), int(j), bool(rng.random() < 0.5))

        assert g.degrees_consistent()
        assert g.outdeg.tolist() == g.adjacency.sum(axis=1).tolist()
        assert g.indeg.tolist() == g.adjacency.sum(axis=0).tolist()

    @pytest.mark.parametrize("pair", [(1, 1), (0, 3), (-1, 0)])
    def test_invalid_pairs_rejected(self, pair):
        """Self-loops and out-of-range vertices are invalid arguments."""
        with pytest.raises(InvalidArgumentError):
            DiGraph(3).toggle_edge(*pair, True)

    def test_from_adjacency_rejects_diagonal(self):
        """A loop on the diagonal is refused."""
        a = np.zeros((3, 3), dtype=bool)
        a[1, 1] = True
        with pytest.raises(InvalidArgumentError):
            DiGraph.from_adjacency(a)

    def test_relabel_preserves_edge_count(self):
        """Relabelling maps edge (u, v) to (perm[u], perm[v])."""
        g = DiGraph.from_edges(4, [(0, 1), (1, 2)])
        h = g.relabel([3, 2, 1, 0])

        assert h.edge_set() == {(3, 2), (2, 1)}

    def test_dyad_census(self):
        """Mutual, asymmetric and null dyads are counted once each."""
        g = DiGraph.from_edges(4, [(0, 1), (1, 0), (2, 3)])

        assert dyad_census(g) == (1, 1, 4)


@pytest.mark.unit
class TestThreshold:
    """Test strength thresholding."""

    def test_threshold_levels(self):
        """Only ties at or above the level survive."""
        v = ValuedEdgeList(n=3, entries=[(0, 1, 3), (1, 2, 1)])

        assert threshold(v, 2).edge_set() == {(0, 1)}
        assert threshold(v, 1).edge_set() == {(0, 1), (1, 2)}

    def test_thresholds_are_nested(self, rng):
        """The graph at s + 1 is a subgraph of the graph at s."""
        entries = [
            (int(i), int(j), int(rng.integers(1, 6)))
            for i in range(8)
            for j in range(8)
            if i != j and rng.random() < 0.4
        ]
        v = ValuedEdgeList(n=8, entries=entries, levels=5)
        for s in range(1, 5):
            assert threshold(v, s + 1).edge_set() <= threshold(v, s).edge_set()

    @pytest.mark.parametrize("level", [0, 4])
    def test_out_of_range_level(self, level):
        """Levels outside 1..L are invalid."""
        v = ValuedEdgeList(n=3, entries=[(0, 1, 3)])
        with pytest.raises(InvalidArgumentError):
            threshold(v, level)


@pytest.mark.unit
class TestEdgeListIO:
    """Test the edge-list text format."""

    def test_read_example(self):
        """Header line plus two entries."""
        v = read_edge_list("3\n0 1 3\n1 2 1\n")

        assert v.n == 3
        assert v.entries == [(0, 1, 3), (1, 2, 1)]

    def test_comments_and_missing_strength(self):
        """Comment lines are skipped and two-field lines mean strength 1."""
        v = read_edge_list("# header\n4\n# an edge\n2 3\n")

        assert v.entries == [(2, 3, 1)]

    def test_round_trip_is_canonical(self):
        """Writing sorts entries so that re-reading and writing is byte-identical."""
        text = "4\n2 3 2\n0 1 1\n1 0 5\n"
        once = write_edge_list(read_edge_list(text))

        assert once == "4\n0 1 1\n1 0 5\n2 3 2\n"
        assert write_edge_list(read_edge_list(once)) == once

    @pytest.mark.parametrize(
        ("text", "line"),
        [
            ("3\n0 0 2\n", 2),
            ("3\n0 1 1\n0 1 2\n", 3),
            ("3\n0 1\n0 5 1\n", 3),
            ("3\n0 one 1\n", 2),
            ("3\n0 1 0\n", 2),
            ("3\n0 1 2 4\n", 2),
        ],
    )
    def test_parse_errors_carry_line_number(self, text, line):
        """Self-loops, duplicates, bad vertices and bad fields report their line."""
        with pytest.raises(EdgeListParseError) as exc_info:
            read_edge_list(text, source="net.edges")

        assert exc_info.value.line_number == line
        assert f"net.edges:{line}" in str(exc_info.value)

    def test_declared_levels_enforced(self):
        """Strengths above the declared level count are rejected."""
        with pytest.raises(EdgeListParseError):
            read_edge_list("3\n0 1 6\n", levels=5)

    def test_graph_file_round_trip(self, tmp_path):
        """Binary graphs survive a write and read."""
        g = DiGraph.from_edges(5, [(0, 1), (3, 4), (4, 3)])
        path = tmp_path / "g.edges"
        write_graph_file(g, path)

        assert read_graph_file(path) == g
