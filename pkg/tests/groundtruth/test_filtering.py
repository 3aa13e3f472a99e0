"""Tests for protocol trace filtering."""

import pytest

from defiblocks.groundtruth.filtering import filter_protocol_traces, protocol_tx_counts, tx_root_protocol
from defiblocks.groundtruth.seeds import ExtendedSeedSet
from defiblocks.ingest.trees import TraceTree, assemble_trace_trees
from defiblocks.ingest.parser import parse_traces
from tests.factories import FIXTURE_DIR

pytestmark = pytest.mark.unit


@pytest.fixture()
def trees() -> list[TraceTree]:
    return list(assemble_trace_trees(parse_traces(FIXTURE_DIR / "traces.csv")))


class TestFiltering:
    def test_root_protocol(self, aggregator_swap_tree: TraceTree, ext: ExtendedSeedSet) -> None:
        assert tx_root_protocol(aggregator_swap_tree, ext) == "1inch"

    def test_unlabeled_root_dropped(self, trees: list[TraceTree], ext: ExtendedSeedSet) -> None:
        assert len(trees) == 3
        kept = list(filter_protocol_traces(trees, ext))
        assert [t.tx_hash for t in kept] == [t.tx_hash for t in trees[:2]]

    def test_counts(self, trees: list[TraceTree], ext: ExtendedSeedSet) -> None:
        assert protocol_tx_counts(trees, ext) == {"1inch": 1, "uniswap": 1}
