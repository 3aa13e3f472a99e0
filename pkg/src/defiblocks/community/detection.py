"""Community detection dispatch and the Partition type."""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import networkx as nx

from defiblocks.community.eigenvector import leading_eigenvector_communities
from defiblocks.community.leiden import leiden_communities
from defiblocks.config.schema import CommunityAlgorithm
from defiblocks.errors import CommunityDetectionError
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import read_table, write_table

logger = get_logger(__name__)

PARTITION_COLUMNS = ("node", "community")


@dataclass(frozen=True)
class Partition:
    """
    Non-overlapping community assignment.

    Community ids are canonical: 0 is the largest community, ties broken by
    smallest member.

    Attributes:
        assignment: Node → community id.
        algorithm: Algorithm that produced it.
        seed: Seed it was produced with.
    """

    assignment: dict[str, int]
    algorithm: CommunityAlgorithm
    seed: int

    @classmethod
    def from_communities(
        cls, communities: Iterable[Iterable[str]], algorithm: CommunityAlgorithm, seed: int
    ) -> "Partition":
        """Build a partition with canonical community ids."""
        groups = sorted((sorted(c) for c in communities if c), key=lambda c: (-len(c), c[0]))
        assignment = {v: i for i, group in enumerate(groups) for v in group}
        return cls(assignment=dict(sorted(assignment.items())), algorithm=algorithm, seed=seed)

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[set[str]]:
        """Communities as node sets, indexed by community id."""
        groups: list[set[str]] = [set() for _ in range(self.n_communities)]
        for v, c in self.assignment.items():
            groups[c].add(v)
        return groups

    def dump(self, path: Path) -> int:
        return write_table(
            ({"node": v, "community": c} for v, c in self.assignment.items()),
            path,
            PARTITION_COLUMNS,
        )

    @classmethod
    def load(cls, path: Path, algorithm: CommunityAlgorithm, seed: int) -> "Partition":
        frame = read_table(path)
        return cls(
            assignment={row.node: int(row.community) for row in frame.itertuples(index=False)},
            algorithm=algorithm,
            seed=seed,
        )


def detect_communities(
    g: nx.Graph,
    algorithm: Union[CommunityAlgorithm, str],
    seed: int,
    resolution: float = 1.0,
) -> Partition:
    """
    Run one community detection algorithm.

    Args:
        g: Prepared undirected graph.
        algorithm: louvain, leiden, label_propagation or leading_eigenvector.
        seed: Seed for the stochastic parts.
        resolution: Modularity resolution (louvain and leiden).

    Returns:
        Partition covering every node of g.

    Raises:
        CommunityDetectionError: Unknown algorithm id.
    """
    try:
        algo = CommunityAlgorithm(algorithm)
    except ValueError:
        raise CommunityDetectionError(f"unknown algorithm '{algorithm}'") from None

    if algo is CommunityAlgorithm.LOUVAIN:
        communities = nx.community.louvain_communities(g, resolution=resolution, seed=seed)
    elif algo is CommunityAlgorithm.LABEL_PROPAGATION:
        communities = list(nx.community.asyn_lpa_communities(g, seed=seed))
    elif algo is CommunityAlgorithm.LEIDEN:
        communities = leiden_communities(g, seed=seed, resolution=resolution)
    else:
        communities = leading_eigenvector_communities(g, seed=seed)

    partition = Partition.from_communities(communities, algo, seed)
    logger.info(
        "communities_detected",
        algorithm=algo.value,
        seed=seed,
        nodes=len(partition.assignment),
        communities=partition.n_communities,
    )
    return partition
