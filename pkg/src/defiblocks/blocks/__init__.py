"""Building blocks: generalisation, extraction, canonical hashing and the block store."""

from defiblocks.blocks.extraction import (
    BuildingBlock,
    ExtractionResult,
    TxBlocks,
    extract_building_blocks,
    extract_corpus,
)
from defiblocks.blocks.generalize import ASSET, GeneralizedTraceTree, deployed_label, generalize
from defiblocks.blocks.hashing import NO_METHOD, block_hash, canonical_string
from defiblocks.blocks.store import BlockStore, describe_block, flatten_block

__all__ = [
    "ASSET",
    "NO_METHOD",
    "BlockStore",
    "BuildingBlock",
    "ExtractionResult",
    "GeneralizedTraceTree",
    "TxBlocks",
    "block_hash",
    "canonical_string",
    "deployed_label",
    "describe_block",
    "extract_building_blocks",
    "extract_corpus",
    "flatten_block",
    "generalize",
]
