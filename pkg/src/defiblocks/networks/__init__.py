"""Interaction networks at code-account and protocol granularity."""

from defiblocks.networks.builder import build_ca_network, build_protocol_network, ca_edges
from defiblocks.networks.graph import GraphSummary, NodeMeta, WeightedDiGraph, graph_summary

__all__ = [
    "GraphSummary",
    "NodeMeta",
    "WeightedDiGraph",
    "build_ca_network",
    "build_protocol_network",
    "ca_edges",
    "graph_summary",
]
