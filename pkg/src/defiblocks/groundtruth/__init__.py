"""Ground truth: seed labels, seed extension, protocol trace filtering."""

from defiblocks.groundtruth.extension import extend_seeds
from defiblocks.groundtruth.filtering import (
    filter_protocol_traces,
    protocol_tx_counts,
    tx_root_protocol,
)
from defiblocks.groundtruth.seeds import (
    Category,
    ExtendedSeedSet,
    Origin,
    SeedEntry,
    SeedSet,
    load_seeds,
)

__all__ = [
    "Category",
    "ExtendedSeedSet",
    "Origin",
    "SeedEntry",
    "SeedSet",
    "extend_seeds",
    "filter_protocol_traces",
    "load_seeds",
    "protocol_tx_counts",
    "tx_root_protocol",
]
