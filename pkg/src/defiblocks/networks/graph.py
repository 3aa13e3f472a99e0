"""
Weighted directed interaction graph.

Edges are aggregated (src, dst) → count maps; parallel edges never exist.
Node metadata carries the protocol and category of labeled nodes.
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import networkx as nx

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import GraphError
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import read_table, write_table

logger = get_logger(__name__)

EDGE_COLUMNS = ("src", "dst", "weight")
NODE_COLUMNS = ("node", "protocol", "category")
SUMMARY_COLUMNS = ("network", "node_count", "edge_count", "self_loop_count", "average_degree", "density")


@dataclass(frozen=True)
class NodeMeta:
    """Protocol annotation of a node."""

    protocol: Optional[str] = None
    category: Optional[str] = None


@dataclass
class WeightedDiGraph:
    """
    Aggregated interaction network.

    Attributes:
        edges: (src, dst) → weight, every weight ≥ 1.
        node_meta: Node → metadata; contains every node, including isolated ones.
    """

    edges: Counter[tuple[str, str]] = field(default_factory=Counter)
    node_meta: dict[str, NodeMeta] = field(default_factory=dict)

    def add_node(self, node: str, meta: Optional[NodeMeta] = None) -> None:
        """Add a node; existing metadata is kept unless `meta` is given."""
        if meta is not None or node not in self.node_meta:
            self.node_meta[node] = meta or NodeMeta()

    def add_edge(self, src: str, dst: str, weight: int = 1) -> None:
        """Add weight to an edge, creating its endpoints."""
        if weight < 1:
            raise GraphError(f"edge weight must be >= 1, got {weight}")
        self.add_node(src)
        self.add_node(dst)
        self.edges[(src, dst)] += weight

    @property
    def nodes(self) -> list[str]:
        """Sorted node ids."""
        return sorted(self.node_meta)

    @property
    def node_count(self) -> int:
        return len(self.node_meta)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def self_loop_count(self) -> int:
        return sum(1 for src, dst in self.edges if src == dst)

    def total_weight(self) -> int:
        """Sum of all edge weights."""
        return sum(self.edges.values())

    def to_networkx(self) -> nx.DiGraph:
        """Convert to a networkx DiGraph with `weight` edge attributes."""
        g = nx.DiGraph()
        for node in self.nodes:
            meta = self.node_meta[node]
            g.add_node(node, protocol=meta.protocol, category=meta.category)
        g.add_weighted_edges_from((s, d, w) for (s, d), w in sorted(self.edges.items()))
        return g

    def dump(self, edges_path: Path, nodes_path: Path) -> None:
        """Write the edge table and the node-metadata sidecar, both sorted."""
        write_table(
            ({"src": s, "dst": d, "weight": w} for (s, d), w in sorted(self.edges.items())),
            edges_path,
            EDGE_COLUMNS,
        )
        write_table(
            (
                {"node": n, "protocol": m.protocol or "", "category": m.category or ""}
                for n, m in sorted(self.node_meta.items())
            ),
            nodes_path,
            NODE_COLUMNS,
        )

    @classmethod
    def load(cls, edges_path: Path, nodes_path: Path) -> "WeightedDiGraph":
        """Read a graph written by `dump`."""
        g = cls()
        for row in read_table(nodes_path).itertuples(index=False):
            g.add_node(row.node, NodeMeta(row.protocol or None, row.category or None))
        for row in read_table(edges_path).itertuples(index=False):
            g.add_edge(row.src, row.dst, int(row.weight))
        return g

    @classmethod
    def merge(cls, parts: Iterable["WeightedDiGraph"]) -> "WeightedDiGraph":
        """Associative merge of partial graphs; weights add up."""
        merged = cls()
        for part in parts:
            for node, meta in part.node_meta.items():
                if meta != NodeMeta() or node not in merged.node_meta:
                    merged.node_meta[node] = meta
            merged.edges.update(part.edges)
        return merged


@dataclass(frozen=True)
class GraphSummary:
    """Summary statistics of a network."""

    node_count: int
    edge_count: int
    self_loop_count: int
    average_degree: float
    density: float

    def to_row(self, network: str) -> dict[str, object]:
        return {
            "network": network,
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "self_loop_count": self.self_loop_count,
            "average_degree": self.average_degree,
            "density": self.density,
        }


def graph_summary(g: WeightedDiGraph, diagnostics: Optional[DiagnosticCollector] = None) -> GraphSummary:
    """
    Compute node/edge counts, average degree and density.

    Average degree is edges / nodes over distinct directed edges; density is
    edges / (n (n - 1)). Self-loops count as edges. With fewer than two nodes
    density is 0.

    Args:
        g: Network.
        diagnostics: Collector for the small-graph case.

    Returns:
        The summary.
    """
    n = g.node_count
    e = g.edge_count
    if n < 2:
        if diagnostics is not None:
            diagnostics.report("density_undefined", "fewer than 2 nodes; density set to 0", nodes=n)
        else:
            logger.warning("density_undefined", nodes=n)
        density = 0.0
    else:
        density = e / (n * (n - 1))
    return GraphSummary(
        node_count=n,
        edge_count=e,
        self_loop_count=g.self_loop_count,
        average_degree=e / n if n else 0.0,
        density=density,
    )
