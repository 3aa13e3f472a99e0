"""Tests for first-level composition and the composition matrix."""

from pathlib import Path

import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from defiblocks.blocks.extraction import BuildingBlock, TxBlocks, extract_corpus
from defiblocks.blocks.store import BlockStore
from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.groundtruth.seeds import ExtendedSeedSet
from defiblocks.ingest.parser import parse_traces
from defiblocks.ingest.registry import ContractRegistry
from defiblocks.ingest.trees import assemble_trace_trees
from defiblocks.reports.composition import (
    NONE,
    build_composition_matrix,
    first_level_composition,
    outermost_blocks,
    treemap_rows,
    tx_flattening,
)
from tests.factories import FIXTURE_DIR

pytestmark = pytest.mark.unit


def _block(digest: str, protocol: str, children: tuple[str, ...] = ()) -> BuildingBlock:
    return BuildingBlock(
        hash=digest,
        root_protocol=protocol,
        root_method_id=None,
        vertex_labels=("x",),
        outdegrees=(0,),
        method_ids=(None,),
        child_hashes=children,
    )


@pytest.fixture()
def corpus(ext: ExtendedSeedSet, registry: ContractRegistry) -> tuple[list[TxBlocks], BlockStore]:
    trees = list(assemble_trace_trees(parse_traces(FIXTURE_DIR / "traces.csv")))
    txs = extract_corpus(trees, ext, registry)
    store = BlockStore()
    for tx in txs:
        store.add_all(tx.blocks)
    return txs, store


class TestOutermost:
    def test_nested_blocks_excluded(self) -> None:
        a, b = _block("a", "p"), _block("b", "q")
        outer = _block("c", "r", ("a", "b"))
        assert outermost_blocks([a, b, outer]) == [outer]

    def test_repeated_hash_outside_nesting_is_outermost(self) -> None:
        a = _block("a", "p")
        outer = _block("c", "r", ("a",))
        assert outermost_blocks([a, outer, a]) == [outer, a]


class TestFirstLevel:
    def test_aggregator_swap(self, corpus: tuple[list[TxBlocks], BlockStore]) -> None:
        txs, _ = corpus
        assert first_level_composition("1inch", txs[0].blocks) == frozenset({"uniswap", "sushiswap"})
        assert first_level_composition("uniswap", txs[1].blocks) == frozenset({NONE})

    def test_other_root_protocol_ignored(self) -> None:
        blocks = [_block("a", "p"), _block("c", "q", ("a",))]
        assert first_level_composition("r", blocks) == frozenset({NONE})

    def test_treemap(self, corpus: tuple[list[TxBlocks], BlockStore]) -> None:
        txs, _ = corpus
        rows = treemap_rows(txs)
        assert rows == [
            {"root_protocol": "1inch", "protocols": "sushiswap+uniswap", "n_protocols": 2, "transactions": 1, "share": 1.0},
            {"root_protocol": "uniswap", "protocols": NONE, "n_protocols": 0, "transactions": 1, "share": 1.0},
        ]
        assert [r["root_protocol"] for r in treemap_rows(txs, ["uniswap"])] == ["uniswap"]


class TestCompositionMatrix:
    def test_fixture(self, corpus: tuple[list[TxBlocks], BlockStore], tmp_path: Path) -> None:
        txs, store = corpus
        diags = DiagnosticCollector()
        flat = [(tx.root_protocol, tx_flattening(tx, store)) for tx in txs]
        matrix = build_composition_matrix(flat, ["1inch", "aave", "sushiswap", "uniswap"], diags)
        assert matrix.rows == ["1inch", "uniswap"]
        assert matrix.columns == ["1inch", "sushiswap", "uniswap", NONE]
        assert matrix.cell("1inch", "sushiswap") == 1.0
        assert matrix.cell("uniswap", "1inch") == 0.0
        assert matrix.cell("uniswap", NONE) == 0.0
        assert diags.codes() == ["empty_composition_row", "empty_composition_row"]

        matrix.dump(tmp_path / "composition.csv", tmp_path / "intensity.csv")
        frame = pd.read_csv(tmp_path / "composition.csv", index_col="protocol")
        assert list(frame.columns) == ["transactions", *matrix.columns]
        assert frame.loc["1inch", "uniswap"] == 1.0

    def test_none_column(self) -> None:
        matrix = build_composition_matrix([("p", []), ("p", [("p", "h1")]), ("p", [("q", "h2"), ("q", "h3")])])
        assert matrix.cell("p", NONE) == pytest.approx(1 / 3)
        assert matrix.cell("p", "q") == pytest.approx(1 / 3)
        assert matrix.intensity_frame().loc["p", "q"] == pytest.approx(2 / 3)
        assert matrix.row_tx_counts == {"p": 3}


flat_txs = st.lists(
    st.tuples(
        st.sampled_from(["p", "q"]),
        st.lists(st.tuples(st.sampled_from(["p", "q", "r"]), st.sampled_from(["h1", "h2"])), max_size=4),
    ),
    min_size=1,
    max_size=20,
)


@given(flat_txs)
def test_none_complements_any_block(txs: list[tuple[str, list[tuple[str, str]]]]) -> None:
    matrix = build_composition_matrix(txs)
    for row in matrix.rows:
        members = [flat for root, flat in txs if root == row]
        with_blocks = sum(1 for flat in members if flat) / len(members)
        assert matrix.cell(row, NONE) + with_blocks == pytest.approx(1.0)
        for column in matrix.columns[:-1]:
            assert 0.0 <= matrix.cell(row, column) <= with_blocks + 1e-12
