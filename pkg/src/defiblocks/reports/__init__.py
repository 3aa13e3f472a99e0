"""Frequency and composition reports over extracted building blocks."""

from defiblocks.reports.composition import (
    NONE,
    CompositionMatrix,
    build_composition_matrix,
    first_level_composition,
    outermost_blocks,
    treemap_rows,
    tx_flattening,
)
from defiblocks.reports.counts import BlockCount, count_blocks, load_method_names

__all__ = [
    "NONE",
    "BlockCount",
    "CompositionMatrix",
    "build_composition_matrix",
    "count_blocks",
    "first_level_composition",
    "load_method_names",
    "outermost_blocks",
    "treemap_rows",
    "tx_flattening",
]
