"""Degree sequences of interaction networks."""

from collections import Counter
from typing import Optional

import numpy as np

from defiblocks.config.schema import DegreeMode
from defiblocks.networks.graph import WeightedDiGraph

TOP_DEGREE_COLUMNS = ("rank", "node", "protocol", "total_degree", "in_degree", "out_degree")


def _in_out(g: WeightedDiGraph) -> tuple[Counter[str], Counter[str]]:
    indeg: Counter[str] = Counter()
    outdeg: Counter[str] = Counter()
    for src, dst in g.edges:
        outdeg[src] += 1
        indeg[dst] += 1
    return indeg, outdeg


def degree_sequence(g: WeightedDiGraph, mode: DegreeMode = DegreeMode.TOTAL) -> dict[str, int]:
    """
    Unweighted degrees over distinct directed edges.

    A self-loop adds one to the in-degree and one to the out-degree.

    Args:
        g: Network.
        mode: in, out or total.

    Returns:
        Node → degree for every node, sorted by node.
    """
    indeg, outdeg = _in_out(g)
    result: dict[str, int] = {}
    for node in g.nodes:
        if mode is DegreeMode.IN:
            result[node] = indeg[node]
        elif mode is DegreeMode.OUT:
            result[node] = outdeg[node]
        else:
            result[node] = indeg[node] + outdeg[node]
    return result


def degree_values(degrees: dict[str, int]) -> np.ndarray:
    """Degree multiset as an integer array."""
    return np.fromiter(degrees.values(), dtype=np.int64, count=len(degrees))


def top_degree_rows(g: WeightedDiGraph, n: int = 15) -> list[dict[str, object]]:
    """
    Nodes with the highest total degree.

    Ties are broken by node id.
    """
    indeg, outdeg = _in_out(g)
    ranked = sorted(g.nodes, key=lambda v: (-(indeg[v] + outdeg[v]), v))[:n]
    rows: list[dict[str, object]] = []
    for rank, node in enumerate(ranked, start=1):
        protocol: Optional[str] = g.node_meta[node].protocol
        rows.append(
            {
                "rank": rank,
                "node": node,
                "protocol": protocol or "",
                "total_degree": indeg[node] + outdeg[node],
                "in_degree": indeg[node],
                "out_degree": outdeg[node],
            }
        )
    return rows
