"""Tests for the weighted graph container."""

from pathlib import Path

import pytest

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import GraphError
from defiblocks.networks.graph import NodeMeta, WeightedDiGraph, graph_summary

pytestmark = pytest.mark.unit


def _graph() -> WeightedDiGraph:
    g = WeightedDiGraph()
    g.add_node("a", NodeMeta("p", "dex"))
    g.add_edge("a", "b", 3)
    g.add_edge("b", "c")
    g.add_edge("c", "c", 2)
    g.add_node("isolated")
    return g


class TestWeightedDiGraph:
    def test_counts(self) -> None:
        g = _graph()
        assert g.node_count == 4
        assert g.edge_count == 3
        assert g.total_weight() == 6
        assert g.self_loop_count == 1

    def test_rejects_zero_weight(self) -> None:
        with pytest.raises(GraphError, match=">= 1"):
            WeightedDiGraph().add_edge("a", "b", 0)

    def test_add_edge_keeps_metadata(self) -> None:
        g = _graph()
        g.add_edge("a", "c")
        assert g.node_meta["a"] == NodeMeta("p", "dex")

    def test_dump_load(self, tmp_path: Path) -> None:
        g = _graph()
        g.dump(tmp_path / "edges.csv", tmp_path / "nodes.csv")
        assert WeightedDiGraph.load(tmp_path / "edges.csv", tmp_path / "nodes.csv") == g
        assert (tmp_path / "edges.csv").read_text().splitlines()[0] == "src,dst,weight"

    def test_merge_adds_weights(self) -> None:
        left = WeightedDiGraph()
        left.add_edge("a", "b", 2)
        right = WeightedDiGraph()
        right.add_edge("a", "b")
        right.add_node("a", NodeMeta("p", "dex"))
        merged = WeightedDiGraph.merge([left, right])
        assert merged.edges[("a", "b")] == 3
        assert merged.node_meta["a"].protocol == "p"

    def test_networkx_view(self) -> None:
        nxg = _graph().to_networkx()
        assert nxg["a"]["b"]["weight"] == 3
        assert nxg.nodes["a"]["protocol"] == "p"
        assert "isolated" in nxg


class TestSummary:
    def test_values(self) -> None:
        s = graph_summary(_graph())
        assert s.average_degree == pytest.approx(3 / 4)
        assert s.density == pytest.approx(3 / 12)
        assert s.to_row("ca")["network"] == "ca"

    def test_small_graph_density(self) -> None:
        g = WeightedDiGraph()
        g.add_node("a")
        diags = DiagnosticCollector()
        assert graph_summary(g, diags).density == 0.0
        assert diags.codes() == ["density_undefined"]
