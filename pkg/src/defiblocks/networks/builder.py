"""
Construction of the CA network and the protocol network.

The CA network counts every trace edge between two code accounts across all
protocol traces. The protocol network merges labeled code accounts into one
node per protocol.
"""

from collections import Counter
from functools import partial
from typing import Iterable, Optional, Sequence

from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.ingest.registry import ContractRegistry
from defiblocks.ingest.trees import TraceTree
from defiblocks.logging.setup import get_logger
from defiblocks.networks.graph import NodeMeta, WeightedDiGraph
from defiblocks.utils.parallel import chunked, ordered_map

logger = get_logger(__name__)

DEFAULT_SHARD_TREES = 5_000


def ca_edges(tree: TraceTree, registry: ContractRegistry, include_failed: bool = False) -> Counter[tuple[str, str]]:
    """
    Count CA→CA trace edges of one tree.

    Args:
        tree: Trace tree.
        registry: Registry deciding which addresses are code accounts.
        include_failed: Also count edges inside reverted subtrees.

    Returns:
        (src, dst) → multiplicity.
    """
    counts: Counter[tuple[str, str]] = Counter()
    for edge in tree.edges:
        if edge.parent == TraceTree.ROOT or (edge.failed and not include_failed):
            continue
        src = tree.vertices[edge.parent].address
        dst = tree.vertices[edge.child].address
        if registry.is_contract(src) and registry.is_contract(dst):
            assert src is not None and dst is not None
            counts[(src, dst)] += 1
    return counts


def _count_shard(
    trees: Sequence[TraceTree], registry: ContractRegistry, include_failed: bool
) -> Counter[tuple[str, str]]:
    total: Counter[tuple[str, str]] = Counter()
    for tree in trees:
        total.update(ca_edges(tree, registry, include_failed))
    return total


def build_ca_network(
    trees: Iterable[TraceTree],
    registry: ContractRegistry,
    ext: Optional[SeedSet] = None,
    include_failed: bool = False,
    workers: int = 1,
    shard_size: int = DEFAULT_SHARD_TREES,
) -> WeightedDiGraph:
    """
    Build the CA network from protocol traces.

    Edge weights count trace edges, so a tree calling A→B three times adds 3.
    The external EOA→CA edge never counts.

    Args:
        trees: Protocol traces.
        registry: Contract registry.
        ext: Extended seed set for node metadata.
        include_failed: Count edges inside reverted subtrees.
        workers: Worker processes for shard counting.
        shard_size: Trees per shard.

    Returns:
        The CA network.
    """
    shards = list(chunked(trees, shard_size))
    partials = ordered_map(
        partial(_count_shard, registry=registry, include_failed=include_failed),
        shards,
        workers=workers,
    )

    g = WeightedDiGraph()
    for counts in partials:
        g.edges.update(counts)
    for src, dst in g.edges:
        for node in (src, dst):
            if node not in g.node_meta:
                g.add_node(node, _meta_of(node, ext))

    logger.info(
        "ca_network_built",
        trees=sum(len(s) for s in shards),
        nodes=g.node_count,
        edges=g.edge_count,
        weight=g.total_weight(),
    )
    return g


def _meta_of(address: str, ext: Optional[SeedSet]) -> NodeMeta:
    entry = ext.get(address) if ext is not None else None
    if entry is None:
        return NodeMeta()
    return NodeMeta(protocol=entry.protocol, category=entry.category.value)


def build_protocol_network(ca_graph: WeightedDiGraph, ext: SeedSet) -> WeightedDiGraph:
    """
    Merge labeled code accounts into protocol nodes.

    Unlabeled nodes persist; weights of edges that become parallel are summed
    and intra-protocol edges become self-loops.

    Args:
        ca_graph: CA network.
        ext: Extended seed set.

    Returns:
        The protocol network.
    """
    categories = ext.protocol_categories()
    g = WeightedDiGraph()

    def node_of(address: str) -> str:
        protocol = ext.protocol_of(address)
        if protocol is None:
            g.add_node(address, ca_graph.node_meta.get(address, NodeMeta()))
            return address
        g.add_node(protocol, NodeMeta(protocol=protocol, category=categories[protocol].value))
        return protocol

    for node in ca_graph.nodes:
        node_of(node)
    for (src, dst), weight in sorted(ca_graph.edges.items()):
        g.edges[(node_of(src), node_of(dst))] += weight

    logger.info(
        "protocol_network_built",
        nodes=g.node_count,
        edges=g.edge_count,
        self_loops=g.self_loop_count,
    )
    return g
