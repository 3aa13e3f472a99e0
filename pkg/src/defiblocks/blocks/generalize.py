"""
Generalisation of trace trees before block extraction.

Contracts deployed by a protocol are renamed "$<protocol>-DEPLOYED" and ERC20
token contracts called with a standard ERC20 method are renamed "ASSET", so
that structurally equal calls hash equally.
"""

from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.ingest.registry import ERC20_SELECTORS, ContractRegistry
from defiblocks.ingest.trees import TraceTree, VertexKind

ASSET = "ASSET"

_ERC20_METHODS = frozenset(ERC20_SELECTORS)


class GeneralizedTraceTree(TraceTree):
    """Trace tree whose labels may be generalised names."""


def deployed_label(protocol: str) -> str:
    """Generalised label of a contract deployed by `protocol`."""
    return f"${protocol}-DEPLOYED"


def erc20_called(tree: TraceTree, registry: ContractRegistry) -> set[str]:
    """ERC20 contracts called in this tree with a standard ERC20 method."""
    called: set[str] = set()
    for edge in tree.edges:
        address = tree.vertices[edge.child].address
        if edge.method_id in _ERC20_METHODS and registry.is_erc20(address):
            assert address is not None
            called.add(address)
    return called


def generalize(tree: TraceTree, ext: SeedSet, registry: ContractRegistry) -> GeneralizedTraceTree:
    """
    Replace concrete addresses by generalised labels.

    Extended entries take precedence over the ASSET rule. Shape, t and method
    ids are unchanged.

    Args:
        tree: Trace tree.
        ext: Extended seed set.
        registry: Registry with ERC20 flags.

    Returns:
        The generalised tree.
    """
    assets = erc20_called(tree, registry)
    labels: list[str] = []
    for index, vertex in enumerate(tree.vertices):
        label = vertex.label
        if index != TraceTree.ROOT and vertex.kind is VertexKind.ACCOUNT and vertex.address:
            entry = ext.get(vertex.address)
            if entry is not None and ext.is_extended(vertex.address):
                label = deployed_label(entry.protocol)
            elif vertex.address in assets:
                label = ASSET
        labels.append(label)

    return GeneralizedTraceTree(
        tx_hash=tree.tx_hash,
        block_number=tree.block_number,
        vertices=tree.relabeled(labels).vertices,
        edges=list(tree.edges),
    )
