"""Preparation of the CA network for community detection."""

import networkx as nx

from defiblocks.errors import CommunityDetectionError
from defiblocks.logging.setup import get_logger
from defiblocks.networks.graph import WeightedDiGraph
from defiblocks.topology.components import ComponentMode, connected_components

logger = get_logger(__name__)


def prepare_community_graph(ca_graph: WeightedDiGraph) -> nx.Graph:
    """
    Largest weakly connected component as an undirected simple graph.

    Directions, weights and self-loops are dropped and parallel edges merged.
    Nodes and edges are inserted in sorted order so that seeded algorithms
    see the same graph on every run.

    Args:
        ca_graph: CA network.

    Returns:
        Undirected, unweighted graph.

    Raises:
        CommunityDetectionError: If the network is empty.
    """
    if ca_graph.node_count == 0:
        raise CommunityDetectionError("cannot prepare an empty graph for community detection")

    report = connected_components(ca_graph, ComponentMode.WEAK)
    keep = set(report.components[0])

    g = nx.Graph()
    g.add_nodes_from(report.components[0])
    g.add_edges_from(
        sorted(
            {
                (min(s, d), max(s, d))
                for s, d in ca_graph.edges
                if s != d and s in keep and d in keep
            }
        )
    )
    logger.info(
        "community_graph_prepared",
        nodes=g.number_of_nodes(),
        edges=g.number_of_edges(),
        dropped_nodes=ca_graph.node_count - g.number_of_nodes(),
    )
    return g
