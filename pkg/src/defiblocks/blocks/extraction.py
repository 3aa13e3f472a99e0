"""
Building-block extraction.

Every edge into a protocol vertex whose subtree (counted inclusive of that
edge) is at least two edges deep yields a block. Blocks are processed from
the shallowest subtree upwards, ties by execution order; after each block the
subtree is replaced in the working tree by a single leaf labeled with the
block hash, so enclosing blocks contain the hashes of nested ones.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Any, Iterable, Optional, Sequence

from defiblocks.blocks.generalize import generalize
from defiblocks.blocks.hashing import block_hash
from defiblocks.groundtruth.filtering import tx_root_protocol
from defiblocks.groundtruth.seeds import SeedSet
from defiblocks.ingest.registry import ContractRegistry
from defiblocks.ingest.trees import TraceEdge, TraceTree, TraceVertex, VertexKind
from defiblocks.logging.setup import get_logger
from defiblocks.utils.parallel import chunked, ordered_map

logger = get_logger(__name__)

MIN_BLOCK_DEPTH = 2


@dataclass(frozen=True)
class BuildingBlock:
    """
    Extracted protocol subtree.

    Attributes:
        hash: SHA-256 hex digest of the canonical string.
        root_protocol: Protocol of the subtree root.
        root_method_id: Method id of the edge into the root, if any.
        vertex_labels: Labels in execution order.
        outdegrees: Outdegree of each vertex within the block.
        method_ids: Method id of each vertex's incoming edge.
        edges: (parent position, child position) pairs into the lists above.
        child_hashes: Hashes of nested blocks appearing as leaves.
    """

    hash: str
    root_protocol: str
    root_method_id: Optional[str]
    vertex_labels: tuple[str, ...]
    outdegrees: tuple[int, ...]
    method_ids: tuple[Optional[str], ...]
    edges: tuple[tuple[int, int], ...] = ()
    child_hashes: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        """Number of vertices (equal to the number of subtree edges)."""
        return len(self.vertex_labels)

    def recompute_hash(self) -> str:
        return block_hash(self.vertex_labels, self.outdegrees, self.method_ids)

    def to_dict(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "root_protocol": self.root_protocol,
            "root_method_id": self.root_method_id,
            "vertex_labels": list(self.vertex_labels),
            "outdegrees": list(self.outdegrees),
            "method_ids": list(self.method_ids),
            "edges": [list(e) for e in self.edges],
            "child_hashes": list(self.child_hashes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BuildingBlock":
        return cls(
            hash=data["hash"],
            root_protocol=data["root_protocol"],
            root_method_id=data.get("root_method_id"),
            vertex_labels=tuple(data["vertex_labels"]),
            outdegrees=tuple(int(d) for d in data["outdegrees"]),
            method_ids=tuple(data["method_ids"]),
            edges=tuple((int(a), int(b)) for a, b in data.get("edges", ())),
            child_hashes=tuple(data.get("child_hashes", ())),
        )


@dataclass
class ExtractionResult:
    """Blocks of one tree in emission order and the residual tree."""

    blocks: list[BuildingBlock]
    residual: TraceTree


@dataclass
class _WorkingTree:
    """Mutable tree used while replacing subtrees."""

    vertices: dict[int, TraceVertex]
    in_edge: dict[int, TraceEdge]
    children: dict[int, list[int]] = field(default_factory=dict)
    next_id: int = 0

    @classmethod
    def from_tree(cls, tree: TraceTree, include_failed: bool) -> "_WorkingTree":
        kept = [e for e in tree.edges if include_failed or not e.failed]
        reachable = {TraceTree.ROOT}
        for e in kept:
            if e.parent in reachable:
                reachable.add(e.child)
        work = cls(
            vertices={v: tree.vertices[v] for v in sorted(reachable)},
            in_edge={e.child: e for e in kept if e.child in reachable},
            next_id=len(tree.vertices),
        )
        for e in sorted(work.in_edge.values(), key=lambda e: e.t):
            work.children.setdefault(e.parent, []).append(e.child)
        return work

    def preorder(self, start: int) -> list[int]:
        order: list[int] = []
        stack = [start]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children.get(v, ())))
        return order

    def depths(self) -> dict[int, int]:
        """Inclusive subtree depth of every non-root vertex (a leaf has depth 1)."""
        height: dict[int, int] = {}
        for v in reversed(self.preorder(TraceTree.ROOT)):
            kids = self.children.get(v, ())
            height[v] = 1 + max(height[c] for c in kids) if kids else 0
        return {v: h + 1 for v, h in height.items() if v != TraceTree.ROOT}

    def replace(self, vertex: int, label: str) -> None:
        """Replace the subtree at `vertex` by a hash leaf with the same incoming edge."""
        edge = self.in_edge[vertex]
        for v in self.preorder(vertex):
            self.vertices.pop(v)
            self.in_edge.pop(v, None)
            self.children.pop(v, None)
        leaf = self.next_id
        self.next_id += 1
        self.vertices[leaf] = TraceVertex(label=label, address=None, kind=VertexKind.BLOCK_HASH_LEAF)
        self.in_edge[leaf] = TraceEdge(
            parent=edge.parent,
            child=leaf,
            t=edge.t,
            method_id=edge.method_id,
            trace_type=edge.trace_type,
            failed=edge.failed,
            value=edge.value,
        )
        siblings = self.children[edge.parent]
        siblings[siblings.index(vertex)] = leaf

    def to_tree(self, tx_hash: str, block_number: int) -> TraceTree:
        order = self.preorder(TraceTree.ROOT)
        index = {v: i for i, v in enumerate(order)}
        edges = [
            TraceEdge(
                parent=index[e.parent],
                child=index[v],
                t=e.t,
                method_id=e.method_id,
                trace_type=e.trace_type,
                failed=e.failed,
                value=e.value,
            )
            for v, e in self.in_edge.items()
        ]
        return TraceTree(
            tx_hash=tx_hash,
            block_number=block_number,
            vertices=[self.vertices[v] for v in order],
            edges=edges,
        )


def extract_building_blocks(
    tree: TraceTree,
    ext: SeedSet,
    include_failed: bool = False,
) -> ExtractionResult:
    """
    Extract possibly nested building blocks from a generalised tree.

    Args:
        tree: Generalised trace tree.
        ext: Extended seed set defining protocol vertices.
        include_failed: Keep reverted subtrees.

    Returns:
        Blocks in emission order and the residual tree.
    """
    work = _WorkingTree.from_tree(tree, include_failed)
    depths = work.depths()

    targets = []
    for v, edge in work.in_edge.items():
        vertex = work.vertices[v]
        if vertex.kind is not VertexKind.ACCOUNT or vertex.address not in ext:
            continue
        if depths[v] >= MIN_BLOCK_DEPTH:
            targets.append((depths[v], edge.t, v))
    targets.sort()

    blocks: list[BuildingBlock] = []
    for _, _, v in targets:
        order = work.preorder(v)
        position = {u: i for i, u in enumerate(order)}
        labels = tuple(work.vertices[u].label for u in order)
        outdegrees = tuple(len(work.children.get(u, ())) for u in order)
        methods = tuple(work.in_edge[u].method_id for u in order)
        digest = block_hash(labels, outdegrees, methods)
        protocol = ext.protocol_of(work.vertices[v].address)
        assert protocol is not None
        blocks.append(
            BuildingBlock(
                hash=digest,
                root_protocol=protocol,
                root_method_id=methods[0],
                vertex_labels=labels,
                outdegrees=outdegrees,
                method_ids=methods,
                edges=tuple((position[work.in_edge[u].parent], position[u]) for u in order[1:]),
                child_hashes=tuple(
                    work.vertices[u].label
                    for u in order
                    if work.vertices[u].kind is VertexKind.BLOCK_HASH_LEAF
                ),
            )
        )
        work.replace(v, digest)

    return ExtractionResult(blocks=blocks, residual=work.to_tree(tree.tx_hash, tree.block_number))


@dataclass(frozen=True)
class TxBlocks:
    """Blocks emitted for one protocol trace."""

    tx_hash: str
    root_protocol: str
    blocks: tuple[BuildingBlock, ...]

    @property
    def block_hashes(self) -> list[str]:
        return [b.hash for b in self.blocks]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tx_hash": self.tx_hash,
            "root_protocol": self.root_protocol,
            "block_hashes": self.block_hashes,
        }


def _extract_shard(
    trees: Sequence[TraceTree],
    ext: SeedSet,
    registry: ContractRegistry,
    include_failed: bool,
) -> list[TxBlocks]:
    out: list[TxBlocks] = []
    for tree in trees:
        protocol = tx_root_protocol(tree, ext)
        if protocol is None:
            continue
        result = extract_building_blocks(generalize(tree, ext, registry), ext, include_failed)
        out.append(TxBlocks(tx_hash=tree.tx_hash, root_protocol=protocol, blocks=tuple(result.blocks)))
    return out


def extract_corpus(
    trees: Iterable[TraceTree],
    ext: SeedSet,
    registry: ContractRegistry,
    include_failed: bool = False,
    workers: int = 1,
    shard_size: int = 2_000,
) -> list[TxBlocks]:
    """
    Generalise and extract blocks for every protocol trace.

    Output order follows input order for any number of workers.

    Args:
        trees: Protocol traces.
        ext: Extended seed set.
        registry: Contract registry.
        include_failed: Keep reverted subtrees.
        workers: Worker processes.
        shard_size: Trees per shard.

    Returns:
        Per-transaction blocks.
    """
    shards = list(chunked(trees, shard_size))
    parts = ordered_map(
        partial(_extract_shard, ext=ext, registry=registry, include_failed=include_failed),
        shards,
        workers=workers,
    )
    result = [tx for part in parts for tx in part]
    logger.info(
        "blocks_extracted",
        transactions=len(result),
        blocks=sum(len(tx.blocks) for tx in result),
    )
    return result
