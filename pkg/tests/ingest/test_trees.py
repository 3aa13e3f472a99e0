"""Tests for trace tree assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.ingest.records import TraceRecord
from defiblocks.ingest.trees import (
    CREATE_PLACEHOLDER,
    TraceTree,
    assemble_trace_trees,
    assemble_tree,
)
from tests.factories import (
    BAT,
    SWAP_TX,
    ROUTER,
    SUSHI_PAIR,
    TRANSFER,
    UNI_PAIR,
    USER,
    addr,
    random_tx_records,
    record,
    txh,
)

pytestmark = pytest.mark.unit


class TestAggregatorSwap:
    def test_shape(self, aggregator_swap_tree: TraceTree) -> None:
        assert aggregator_swap_tree.tx_hash == SWAP_TX
        assert len(aggregator_swap_tree.vertices) == 14
        assert len(aggregator_swap_tree.edges) == 13
        assert aggregator_swap_tree.root_caller == USER
        assert aggregator_swap_tree.root_target == ROUTER
        assert aggregator_swap_tree.height(TraceTree.ROOT) == 3

    def test_router_children_in_execution_order(self, aggregator_swap_tree: TraceTree) -> None:
        router = aggregator_swap_tree.root_edge.child
        callees = [aggregator_swap_tree.vertices[e.child].address for e in aggregator_swap_tree.children(router)]
        assert callees[:2] == [BAT, UNI_PAIR]
        assert callees[3] == SUSHI_PAIR
        assert len(callees) == 6

    def test_preorder_matches_t_order(self, aggregator_swap_tree: TraceTree) -> None:
        order = aggregator_swap_tree.preorder()
        assert [aggregator_swap_tree.in_edge(v).t for v in order[1:]] == list(range(13))

    def test_input_order_irrelevant(self, aggregator_swap_records: list[TraceRecord]) -> None:
        shuffled = list(reversed(aggregator_swap_records))
        assert assemble_tree(shuffled) == assemble_tree(aggregator_swap_records)


class TestRejection:
    def test_missing_external(self) -> None:
        diags = DiagnosticCollector()
        assert assemble_tree([record(txh(1), addr(1), addr(2), (0,))], diags) is None
        assert diags.codes() == ["missing_external"]

    def test_orphan(self) -> None:
        diags = DiagnosticCollector()
        records = [record(txh(1), addr(1), addr(2)), record(txh(1), addr(2), addr(3), (0, 1))]
        assert assemble_tree(records, diags) is None
        assert diags.codes() == ["orphan_trace"]

    def test_duplicate(self) -> None:
        diags = DiagnosticCollector()
        records = [
            record(txh(1), addr(1), addr(2)),
            record(txh(1), addr(2), addr(3), (0,)),
            record(txh(1), addr(2), addr(4), (0,)),
        ]
        assert assemble_tree(records, diags) is None
        assert diags.codes() == ["duplicate_trace"]


class TestFlags:
    def test_failure_propagates_down(self) -> None:
        tree = assemble_tree(
            [
                record(txh(1), addr(1), addr(2)),
                record(txh(1), addr(2), addr(3), (0,), status="failed"),
                record(txh(1), addr(3), addr(4), (0, 0)),
                record(txh(1), addr(2), addr(5), (1,)),
            ]
        )
        assert tree is not None
        assert [e.failed for e in tree.edges] == [False, True, True, False]

    def test_unassigned_creation_placeholder(self) -> None:
        tree = assemble_tree(
            [record(txh(1), addr(1), addr(2)), record(txh(1), addr(2), None, (0,), trace_type="create")]
        )
        assert tree is not None
        assert tree.vertices[2].label == CREATE_PLACEHOLDER
        assert tree.vertices[2].address is None

    def test_repeated_callee_gets_fresh_vertices(self) -> None:
        tree = assemble_tree(
            [
                record(txh(1), addr(1), addr(2)),
                record(txh(1), addr(2), BAT, (0,), TRANSFER),
                record(txh(1), addr(2), BAT, (1,), TRANSFER),
            ]
        )
        assert tree is not None
        assert [v.address for v in tree.vertices] == [addr(1), addr(2), BAT, BAT]


class TestAssembleMany:
    def test_first_appearance_order_and_rejections(self) -> None:
        records = [
            record(txh(2), addr(1), addr(2)),
            record(txh(1), addr(1), addr(3)),
            record(txh(3), addr(1), addr(3), (0,)),
        ]
        diags = DiagnosticCollector()
        trees = list(assemble_trace_trees(records, diags))
        assert [t.tx_hash for t in trees] == [txh(2), txh(1)]
        assert diags.codes() == ["missing_external"]


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_trees_are_well_formed(seed: int) -> None:
    rng = np.random.default_rng(seed)
    records = random_tx_records(rng, txh(7), [addr(i) for i in range(1, 6)])
    tree = assemble_tree(records)
    assert tree is not None
    assert len(tree.edges) == len(records)
    assert len(tree.vertices) == len(records) + 1
    # t is the lexicographic rank of the trace address.
    paths = sorted(r.trace_address for r in records)
    for edge in tree.edges:
        assert edge.child == edge.t + 1
        parent = tree.in_edge(edge.parent)
        if parent is None:
            assert paths[edge.t] == ()
        else:
            assert paths[edge.t][:-1] == paths[parent.t]
    assert sorted(tree.preorder()) == list(range(len(tree.vertices)))
