"""Tests for generalisation and building-block extraction."""

from typing import Optional

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defiblocks.blocks.extraction import extract_building_blocks, extract_corpus
from defiblocks.blocks.generalize import ASSET, deployed_label, generalize
from defiblocks.groundtruth.seeds import ExtendedSeedSet
from defiblocks.ingest.parser import parse_traces
from defiblocks.ingest.records import TraceRecord
from defiblocks.ingest.registry import ContractRegistry
from defiblocks.ingest.trees import TraceTree, VertexKind, assemble_trace_trees, assemble_tree
from tests.factories import (
    BALANCE_OF,
    FIXTURE_DIR,
    ROUTER,
    SWAP,
    TRANSFER,
    TRANSFER_FROM,
    addr,
    contracts,
    labels,
    random_tx_records,
    record,
    txh,
)

pytestmark = pytest.mark.unit

PAIR_LABELS = ("$uniswap-DEPLOYED", ASSET, ASSET, ASSET)


class TestGeneralize:
    def test_aggregator_swap_labels(self, aggregator_swap_tree: TraceTree, ext: ExtendedSeedSet, registry: ContractRegistry) -> None:
        g = generalize(aggregator_swap_tree, ext, registry)
        labels_ = [v.label for v in g.vertices]
        assert labels_[1] == ROUTER
        assert labels_.count(deployed_label("uniswap")) == 1
        assert labels_.count(deployed_label("sushiswap")) == 1
        assert labels_.count(ASSET) == 10
        assert g.edges == aggregator_swap_tree.edges

    def test_non_erc20_method_keeps_address(self) -> None:
        token = addr(5)
        tree = assemble_tree(
            [record(txh(1), addr(1), addr(2)), record(txh(1), addr(2), token, (0,), SWAP)]
        )
        g = generalize(tree, labels({}), contracts(addr(2), erc20=[token]))
        assert g.vertices[2].label == token

    def test_extended_wins_over_asset(self) -> None:
        token = addr(5)
        tree = assemble_tree(
            [record(txh(1), addr(1), addr(2)), record(txh(1), addr(2), token, (0,), TRANSFER)]
        )
        g = generalize(tree, labels({token: "p"}, extended=[token]), contracts(erc20=[token]))
        assert g.vertices[2].label == "$p-DEPLOYED"


class TestAggregatorSwapBlocks:
    def test_nested_blocks(self, aggregator_swap_tree: TraceTree, ext: ExtendedSeedSet, registry: ContractRegistry) -> None:
        result = extract_building_blocks(generalize(aggregator_swap_tree, ext, registry), ext)
        uni, sushi, router = result.blocks
        assert [b.root_protocol for b in result.blocks] == ["uniswap", "sushiswap", "1inch"]
        assert uni.vertex_labels == PAIR_LABELS
        assert uni.outdegrees == (3, 0, 0, 0)
        assert uni.method_ids == (SWAP, TRANSFER, BALANCE_OF, BALANCE_OF)
        assert sushi.vertex_labels[0] == "$sushiswap-DEPLOYED"
        assert router.size == 7
        assert router.child_hashes == (uni.hash, sushi.hash)
        assert router.root_method_id == "7c025200"
        assert router.edges == tuple((0, i) for i in range(1, 7))
        assert all(b.recompute_hash() == b.hash for b in result.blocks)

    def test_residual_is_root_edge_to_hash(
        self, aggregator_swap_tree: TraceTree, ext: ExtendedSeedSet, registry: ContractRegistry
    ) -> None:
        result = extract_building_blocks(generalize(aggregator_swap_tree, ext, registry), ext)
        residual = result.residual
        assert len(residual.vertices) == 2
        assert residual.vertices[1].kind is VertexKind.BLOCK_HASH_LEAF
        assert residual.vertices[1].label == result.blocks[-1].hash

    def test_same_swap_same_hash_across_transactions(self, ext: ExtendedSeedSet, registry: ContractRegistry) -> None:
        trees = list(assemble_trace_trees(parse_traces(FIXTURE_DIR / "traces.csv")))
        txs = extract_corpus(trees, ext, registry)
        assert [tx.root_protocol for tx in txs] == ["1inch", "uniswap"]
        assert txs[1].block_hashes == [txs[0].block_hashes[0]]
        assert len({h for tx in txs for h in tx.block_hashes}) == 3


class TestRules:
    def test_shallow_protocol_call_is_not_a_block(self) -> None:
        tree = assemble_tree(
            [record(txh(1), addr(1), addr(2)), record(txh(1), addr(2), addr(3), (0,), TRANSFER)]
        )
        result = extract_building_blocks(tree, labels({addr(3): "p"}))
        assert result.blocks == []

    def test_failed_subtree_dropped(self) -> None:
        records = [
            record(txh(1), addr(1), addr(2)),
            record(txh(1), addr(2), addr(3), (0,), TRANSFER, status="failed"),
        ]
        ext = labels({addr(2): "p"})
        assert extract_building_blocks(assemble_tree(records), ext).blocks == []
        assert len(extract_building_blocks(assemble_tree(records), ext, include_failed=True).blocks) == 1

    def test_asset_invariance(self) -> None:
        def block_of(token: str) -> str:
            tree = assemble_tree(
                [
                    record(txh(1), addr(1), addr(2), (), SWAP),
                    record(txh(1), addr(2), token, (0,), TRANSFER),
                ]
            )
            ext = labels({addr(2): "p"})
            registry = contracts(addr(2), erc20=[addr(7), addr(8)])
            (block,) = extract_building_blocks(generalize(tree, ext, registry), ext).blocks
            return block.hash

        assert block_of(addr(7)) == block_of(addr(8))

    def test_workers_keep_order(self, ext: ExtendedSeedSet, registry: ContractRegistry) -> None:
        trees = list(assemble_trace_trees(parse_traces(FIXTURE_DIR / "traces.csv")))
        assert extract_corpus(trees, ext, registry) == extract_corpus(trees, ext, registry, workers=2, shard_size=1)


def _deep_protocol_vertices(tree: TraceTree, ext: ExtendedSeedSet) -> int:
    return sum(
        1
        for v in range(1, len(tree.vertices))
        if tree.vertices[v].address in ext and tree.height(v) >= 1
    )


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_one_block_per_deep_protocol_vertex(seed: int) -> None:
    rng = np.random.default_rng(seed)
    pool = [addr(i) for i in range(1, 7)]
    ext = labels({pool[0]: "p", pool[1]: "p", pool[2]: "q"})
    tree = assemble_tree(random_tx_records(rng, txh(1), pool, max_vertices=15))
    result = extract_building_blocks(tree, ext)
    assert len(result.blocks) == _deep_protocol_vertices(tree, ext)
    seen: set[str] = set()
    for block in result.blocks:
        assert set(block.child_hashes) <= seen
        assert sum(block.outdegrees) == block.size - 1
        seen.add(block.hash)


@pytest.mark.slow
def test_block_count_on_seeded_trees() -> None:
    pool = [addr(i) for i in range(1, 7)]
    ext = labels({pool[0]: "p", pool[1]: "q", pool[2]: "r"})
    for seed in range(1_000):
        rng = np.random.default_rng(seed)
        tree = assemble_tree(random_tx_records(rng, txh(seed + 1), pool, max_vertices=12))
        assert len(extract_building_blocks(tree, ext).blocks) == _deep_protocol_vertices(tree, ext), seed


@pytest.mark.slow
def test_token_substitution_keeps_hashes() -> None:
    pair_p, pair_q, helper, token, other_token = addr(2), addr(3), addr(4), addr(7), addr(8)
    ext = labels({pair_p: "p", pair_q: "q"})
    registry = contracts(pair_p, pair_q, helper, erc20=[token, other_token])
    erc20_methods = (TRANSFER, TRANSFER_FROM, BALANCE_OF)

    def hashes(records: list[TraceRecord]) -> list[str]:
        tree = generalize(assemble_tree(records), ext, registry)
        return [b.hash for b in extract_building_blocks(tree, ext).blocks]

    def swapped(address: Optional[str]) -> Optional[str]:
        return other_token if address == token else address

    n_blocks = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        records = [
            r.model_copy(update={"method_id": erc20_methods[int(rng.integers(3))]}) if r.to_address == token else r
            for r in random_tx_records(rng, txh(seed + 1), [pair_p, pair_q, helper, token], methods=(SWAP, None))
        ]
        substituted = [
            r.model_copy(update={"from_address": swapped(r.from_address), "to_address": swapped(r.to_address)})
            for r in records
        ]
        original = hashes(records)
        assert hashes(substituted) == original, seed
        n_blocks += len(original)
    assert n_blocks > 0
