"""Reduction of the trace corpus to protocol traces."""

from collections import Counter
from typing import Iterable, Iterator, Optional

from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.ingest.trees import TraceTree
from defiblocks.logging.setup import get_logger

logger = get_logger(__name__)


def tx_root_protocol(tree: TraceTree, ext: SeedSet) -> Optional[str]:
    """Protocol receiving the external transaction, if labeled."""
    return ext.protocol_of(tree.root_target)


def filter_protocol_traces(trees: Iterable[TraceTree], ext: SeedSet) -> Iterator[TraceTree]:
    """
    Keep trees whose external transaction targets a labeled address.

    Args:
        trees: Assembled trees.
        ext: Extended seed set.

    Yields:
        Protocol traces in input order.
    """
    n_in = n_out = 0
    for tree in trees:
        n_in += 1
        if tree.root_target in ext:
            n_out += 1
            yield tree
    logger.info("protocol_traces_filtered", trees=n_in, protocol_traces=n_out)


def protocol_tx_counts(trees: Iterable[TraceTree], ext: SeedSet) -> dict[str, int]:
    """Number of protocol traces per receiving protocol, sorted by protocol."""
    counter: Counter[str] = Counter()
    for tree in trees:
        protocol = tx_root_protocol(tree, ext)
        if protocol is not None:
            counter[protocol] += 1
    return dict(sorted(counter.items()))
