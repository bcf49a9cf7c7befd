"""Directed-graph representation and edge-list ingestion."""

from biasnet.graph.digraph import DiGraph, ValuedEdgeList, dyad_census, threshold
from biasnet.graph.io import (
    read_edge_list,
    read_edge_list_file,
    read_graph_file,
    write_edge_list,
    write_edge_list_file,
    write_graph_file,
)

__all__ = [
    "DiGraph",
    "ValuedEdgeList",
    "dyad_census",
    "read_edge_list",
    "read_edge_list_file",
    "read_graph_file",
    "threshold",
    "write_edge_list",
    "write_edge_list_file",
    "write_graph_file",
]
