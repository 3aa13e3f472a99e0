"""Tests for community detection and graph preparation."""

from pathlib import Path

import networkx as nx
import pytest

from defiblocks.community.detection import Partition, detect_communities
from defiblocks.community.evaluation import nmi
from defiblocks.community.prepare import prepare_community_graph
from defiblocks.config.schema import CommunityAlgorithm
from defiblocks.errors import CommunityDetectionError
from defiblocks.networks.graph import WeightedDiGraph

pytestmark = pytest.mark.unit

BLOCKS = 4
BLOCK_SIZE = 50


@pytest.fixture(scope="module")
def planted() -> nx.Graph:
    g = nx.planted_partition_graph(BLOCKS, BLOCK_SIZE, 0.3, 0.01, seed=42)
    return nx.relabel_nodes(g, {v: f"v{v:03d}" for v in g.nodes})


def _truth(node: str) -> str:
    return f"p{int(node[1:]) // BLOCK_SIZE}"


class TestPlantedPartition:
    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_recovers_blocks(self, planted: nx.Graph, algorithm: CommunityAlgorithm) -> None:
        partition = detect_communities(planted, algorithm, seed=7)
        nodes = sorted(partition.assignment)
        assert len(nodes) == BLOCKS * BLOCK_SIZE
        score = nmi([_truth(v) for v in nodes], [str(partition.assignment[v]) for v in nodes])
        assert score >= 0.95

    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_seeded_runs_repeat(self, planted: nx.Graph, algorithm: CommunityAlgorithm) -> None:
        assert detect_communities(planted, algorithm, seed=3) == detect_communities(planted, algorithm, seed=3)

    def test_unknown_algorithm(self, planted: nx.Graph) -> None:
        with pytest.raises(CommunityDetectionError, match="unknown algorithm 'walktrap'"):
            detect_communities(planted, "walktrap", seed=0)


class TestPartition:
    def test_canonical_ids(self) -> None:
        p = Partition.from_communities([{"d"}, {"c", "b"}, {"a", "e"}], CommunityAlgorithm.LOUVAIN, 1)
        assert p.assignment == {"a": 0, "e": 0, "b": 1, "c": 1, "d": 2}
        assert p.n_communities == 3
        assert p.communities() == [{"a", "e"}, {"b", "c"}, {"d"}]

    def test_dump_load(self, tmp_path: Path) -> None:
        p = Partition.from_communities([{"a", "b"}, {"c"}], CommunityAlgorithm.LEIDEN, 5)
        p.dump(tmp_path / "partition.csv")
        assert Partition.load(tmp_path / "partition.csv", CommunityAlgorithm.LEIDEN, 5) == p

    def test_edgeless_graph_gives_singletons(self) -> None:
        g = nx.Graph()
        g.add_nodes_from(["a", "b"])
        for algorithm in (CommunityAlgorithm.LEIDEN, CommunityAlgorithm.LEADING_EIGENVECTOR):
            assert detect_communities(g, algorithm, seed=0).n_communities == 2


class TestPrepare:
    def test_largest_weak_component_undirected(self) -> None:
        ca = WeightedDiGraph()
        ca.add_edge("a", "b", 3)
        ca.add_edge("b", "a")
        ca.add_edge("b", "c")
        ca.add_edge("c", "c")
        ca.add_edge("x", "y")
        g = prepare_community_graph(ca)
        assert sorted(g.nodes) == ["a", "b", "c"]
        assert sorted(g.edges) == [("a", "b"), ("b", "c")]
        assert nx.number_of_selfloops(g) == 0

    def test_empty(self) -> None:
        with pytest.raises(CommunityDetectionError, match="empty graph"):
            prepare_community_graph(WeightedDiGraph())
