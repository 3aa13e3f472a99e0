"""
Shared fixtures.

The aggregator swap fixture routes BAT → WETH → USDT: the 1inch
router pulls BAT from the user, swaps it on a Uniswap pair, forwards WETH to a
SushiSwap pair, swaps again and checks balances. Both pairs were deployed by
their protocol's factory, so seed extension labels them.
"""

from pathlib import Path

import pytest

from defiblocks.config.schema import DefiBlocksConfig
from defiblocks.groundtruth import ExtendedSeedSet, SeedSet, extend_seeds, load_seeds
from defiblocks.ingest import (
    ContractRegistry,
    TraceRecord,
    TraceTree,
    assemble_tree,
    build_contract_registry,
    parse_traces,
)
from tests.factories import FIXTURE_DIR


@pytest.fixture()
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture()
def aggregator_swap_records() -> list[TraceRecord]:
    return list(parse_traces(FIXTURE_DIR / "aggregator_swap.csv"))


@pytest.fixture()
def aggregator_swap_tree(aggregator_swap_records: list[TraceRecord]) -> TraceTree:
    tree = assemble_tree(aggregator_swap_records)
    assert tree is not None
    return tree


@pytest.fixture()
def registry() -> ContractRegistry:
    creations = parse_traces(FIXTURE_DIR / "creations.csv")
    return build_contract_registry(creations, FIXTURE_DIR / "erc20.txt")


@pytest.fixture()
def seeds() -> SeedSet:
    return load_seeds(FIXTURE_DIR / "seeds.csv")


@pytest.fixture()
def ext(seeds: SeedSet, registry: ContractRegistry) -> ExtendedSeedSet:
    return extend_seeds(seeds, registry)


@pytest.fixture()
def fixture_config(tmp_path: Path) -> DefiBlocksConfig:
    """Pipeline configuration over the fixture corpus writing into tmp_path."""
    return DefiBlocksConfig.model_validate(
        {
            "project": {"run_id": "test", "output_dir": tmp_path / "run"},
            "inputs": {
                "traces_path": FIXTURE_DIR / "traces.csv",
                "creations_path": FIXTURE_DIR / "creations.csv",
                "seeds_path": FIXTURE_DIR / "seeds.csv",
                "erc20_path": FIXTURE_DIR / "erc20.txt",
                "method_names_path": FIXTURE_DIR / "method_names.csv",
            },
            "topology": {"bootstrap_n": 0, "min_tail": 2},
        }
    )
