"""Weak and strong component analysis."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np
import pandas as pd

from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.logging.setup import get_logger
from defiblocks.networks.graph import WeightedDiGraph
from defiblocks.utils.io import write_frame

logger = get_logger(__name__)

COMPONENT_COLUMNS = ("mode", "rank", "nodes", "edges", "smallest_member")


class ComponentMode(str, Enum):
    """Component flavour."""

    WEAK = "weak"
    STRONG = "strong"


@dataclass
class ComponentReport:
    """
    Components of a directed network.

    Attributes:
        mode: weak or strong.
        components: Node lists (each sorted), largest first; ties by smallest member.
        membership: Node → component index.
    """

    mode: ComponentMode
    components: list[list[str]]
    membership: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.membership:
            self.membership = {v: i for i, comp in enumerate(self.components) for v in comp}

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    def edge_counts(self, g: WeightedDiGraph) -> list[int]:
        """Distinct directed edges inside each component."""
        counts = [0] * len(self.components)
        for src, dst in g.edges:
            ci = self.membership.get(src)
            if ci is not None and ci == self.membership.get(dst):
                counts[ci] += 1
        return counts

    def rows(self, g: WeightedDiGraph, top_k: Optional[int] = None) -> list[dict[str, object]]:
        """Per-component size table."""
        edges = self.edge_counts(g)
        limit = len(self.components) if top_k is None else min(top_k, len(self.components))
        return [
            {
                "mode": self.mode.value,
                "rank": i + 1,
                "nodes": len(self.components[i]),
                "edges": edges[i],
                "smallest_member": self.components[i][0],
            }
            for i in range(limit)
        ]


def connected_components(g: WeightedDiGraph, mode: ComponentMode = ComponentMode.STRONG) -> ComponentReport:
    """
    Compute exact weak or strong components.

    Args:
        g: Network.
        mode: weak or strong.

    Returns:
        Components sorted by size descending, then smallest member id.
    """
    nxg = g.to_networkx()
    if mode is ComponentMode.STRONG:
        raw = nx.strongly_connected_components(nxg)
    else:
        raw = nx.weakly_connected_components(nxg)
    components = sorted((sorted(c) for c in raw), key=lambda c: (-len(c), c[0]))
    report = ComponentReport(mode=mode, components=components)
    logger.info(
        "components_computed",
        mode=mode.value,
        components=len(components),
        largest=len(components[0]) if components else 0,
    )
    return report


@dataclass
class ComponentMatrix:
    """
    Labeled-node counts per (protocol, component).

    Attributes:
        protocols: Row labels.
        components: Column component indices (0 = largest).
        counts: Integer matrix, protocols × components.
    """

    protocols: list[str]
    components: list[int]
    counts: np.ndarray

    def row(self, protocol: str) -> list[int]:
        return [int(v) for v in self.counts[self.protocols.index(protocol)]]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.counts,
            index=pd.Index(self.protocols, name="protocol"),
            columns=[f"c{i}" for i in self.components],
        )

    def dump(self, path: Path) -> None:
        write_frame(self.to_frame(), path, index=True)


def component_protocol_matrix(report: ComponentReport, ext: SeedSet, top_k: int = 10) -> ComponentMatrix:
    """
    Count labeled addresses per protocol in the largest components.

    Args:
        report: Components of the CA network.
        ext: Extended seed set.
        top_k: Number of largest components to include.

    Returns:
        protocol × component count matrix; every protocol of `ext` has a row.
    """
    protocols = ext.protocols()
    columns = list(range(min(top_k, len(report.components))))
    counts = np.zeros((len(protocols), len(columns)), dtype=np.int64)
    row_of = {p: i for i, p in enumerate(protocols)}
    for ci in columns:
        for node in report.components[ci]:
            protocol = ext.protocol_of(node)
            if protocol is not None:
                counts[row_of[protocol], ci] += 1
    return ComponentMatrix(protocols=protocols, components=columns, counts=counts)
