"""Tests for partition evaluation against protocol labels."""

import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from defiblocks.community.detection import Partition
from defiblocks.community.evaluation import best_matches, evaluate_partition, nmi, same_partition
from defiblocks.config.schema import CommunityAlgorithm, NmiScope, NmiVariant
from defiblocks.errors import CommunityDetectionError
from tests.factories import labels

pytestmark = pytest.mark.unit


def _partition(*groups: set[str]) -> Partition:
    return Partition.from_communities(groups, CommunityAlgorithm.LOUVAIN, 0)


class TestEvaluate:
    def test_perfect_partition(self) -> None:
        ext = labels({"a": "p", "b": "p", "c": "q", "d": "q"})
        report = evaluate_partition(_partition({"a", "b", "x"}, {"c", "d"}), ext)
        assert report.precision == report.recall == report.f1 == 1.0
        assert report.nmi == 1.0
        assert report.community_ratio == 1.0
        assert report.n_communities == 2

    def test_merged_protocols(self) -> None:
        ext = labels({"a": "p", "b": "p", "c": "q", "d": "q"})
        report = evaluate_partition(_partition({"a", "b", "c", "d"}), ext)
        assert report.precision == 0.5
        assert report.recall == 1.0
        assert report.f1 == pytest.approx(2 / 3)
        assert report.nmi == pytest.approx(0.0)
        assert report.community_ratio == 0.5

    def test_split_protocol(self) -> None:
        ext = labels({"a": "p", "b": "p", "c": "p", "d": "p"})
        report = evaluate_partition(_partition({"a", "b", "c"}, {"d"}), ext)
        (match,) = report.matches
        assert match.community == 0
        assert match.recall == 0.75
        assert report.community_ratio == 2.0

    def test_unlabeled_nodes_ignored_by_default(self) -> None:
        ext = labels({"a": "p", "b": "q"})
        partition = _partition({"a", "x"}, {"b", "y"}, {"z"})
        labeled = evaluate_partition(partition, ext)
        everything = evaluate_partition(partition, ext, nmi_scope=NmiScope.ALL)
        assert labeled.nmi == 1.0
        assert everything.nmi < 1.0
        assert labeled.n_communities_with_labels == 2

    def test_modularity_column(self) -> None:
        g = nx.Graph([("a", "b"), ("c", "d")])
        ext = labels({"a": "p", "c": "q"})
        report = evaluate_partition(_partition({"a", "b"}, {"c", "d"}), ext, graph=g)
        assert report.modularity == pytest.approx(0.5)
        assert math.isnan(evaluate_partition(_partition({"a", "b"}, {"c", "d"}), ext).modularity)
        assert report.to_row()["algorithm"] == "louvain"

    def test_no_labels(self) -> None:
        with pytest.raises(CommunityDetectionError, match="no labeled nodes"):
            evaluate_partition(_partition({"x"}), labels({"a": "p"}))


class TestHelpers:
    def test_best_match_tie_goes_to_lower_id(self) -> None:
        (match,) = best_matches({"p": {"a", "b"}}, {0: {"a"}, 1: {"b"}})
        assert match.community == 0

    def test_variants_agree_on_identical_partitions(self) -> None:
        for variant in NmiVariant:
            assert nmi(["a", "a", "b"], ["1", "1", "2"], variant) == 1.0

    def test_same_partition(self) -> None:
        assert same_partition(["a", "b", "a"], ["x", "y", "x"])
        assert not same_partition(["a", "b", "a"], ["x", "x", "x"])


@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=30))
def test_relabeling_keeps_perfect_score(truth: list[str]) -> None:
    renamed = [{"a": "3", "b": "0", "c": "1", "d": "2"}[t] for t in truth]
    assert nmi(truth, renamed) == 1.0
