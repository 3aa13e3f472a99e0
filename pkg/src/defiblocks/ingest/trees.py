"""
Trace tree assembly.

Each transaction's records form a rooted tree. Vertex 0 is the EOA that sent
the external transaction; every record adds one edge to a fresh vertex, so an
address called twice appears on two vertices. Edge rank t is the
lexicographic rank of the record's trace_address.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from defiblocks.diagnostics import Diagnostic, DiagnosticCollector
from defiblocks.ingest.records import TraceRecord, TraceType, format_trace_address
from defiblocks.logging.setup import get_logger
from defiblocks.utils.parallel import ordered_map

logger = get_logger(__name__)

# Label of a created contract whose address the export did not assign.
CREATE_PLACEHOLDER = "<create>"


class VertexKind(str, Enum):
    """Vertex kind."""

    ACCOUNT = "account"
    BLOCK_HASH_LEAF = "block_hash_leaf"


@dataclass(frozen=True)
class TraceVertex:
    """
    Tree vertex.

    Attributes:
        label: Address, generalized name, or block hash.
        address: Underlying address (None for hash leaves and unassigned creations).
        kind: account or block_hash_leaf.
    """

    label: str
    address: Optional[str] = None
    kind: VertexKind = VertexKind.ACCOUNT


@dataclass(frozen=True)
class TraceEdge:
    """
    Tree edge from caller vertex to callee vertex.

    Attributes:
        parent: Caller vertex index.
        child: Callee vertex index.
        t: Execution-order rank.
        method_id: 8 hex chars or None.
        trace_type: Kind of trace.
        failed: The trace or one of its ancestors reverted.
        value: Transferred wei.
    """

    parent: int
    child: int
    t: int
    method_id: Optional[str] = None
    trace_type: TraceType = TraceType.CALL
    failed: bool = False
    value: int = 0


@dataclass
class TraceTree:
    """
    Execution tree of one transaction.

    Attributes:
        tx_hash: Transaction id.
        block_number: Block of the transaction.
        vertices: Vertices; index 0 is the root EOA.
        edges: Edges in ascending t order.
    """

    tx_hash: str
    block_number: int
    vertices: list[TraceVertex]
    edges: list[TraceEdge]
    _children: dict[int, list[TraceEdge]] = field(init=False, repr=False, compare=False)
    _in_edge: dict[int, TraceEdge] = field(init=False, repr=False, compare=False)

    ROOT = 0

    def __post_init__(self) -> None:
        self.edges = sorted(self.edges, key=lambda e: e.t)
        self._children = {}
        self._in_edge = {}
        for edge in self.edges:
            self._children.setdefault(edge.parent, []).append(edge)
            self._in_edge[edge.child] = edge

    @property
    def root_caller(self) -> str:
        """Address of the EOA that sent the transaction."""
        return self.vertices[self.ROOT].label

    @property
    def root_edge(self) -> Optional[TraceEdge]:
        """The external transaction edge."""
        children = self._children.get(self.ROOT)
        return children[0] if children else None

    @property
    def root_target(self) -> Optional[str]:
        """Address targeted by the external transaction."""
        edge = self.root_edge
        return self.vertices[edge.child].address if edge else None

    def children(self, vertex: int) -> list[TraceEdge]:
        """Outgoing edges of a vertex in t order."""
        return list(self._children.get(vertex, ()))

    def in_edge(self, vertex: int) -> Optional[TraceEdge]:
        """Incoming edge of a vertex (None for the root)."""
        return self._in_edge.get(vertex)

    def preorder(self, vertex: int = ROOT) -> list[int]:
        """Vertices of the subtree at `vertex` in depth-first t order."""
        order: list[int] = []
        stack = [vertex]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(e.child for e in reversed(self._children.get(v, ())))
        return order

    def height(self, vertex: int) -> int:
        """Longest downward path from `vertex`, in edges."""
        best: dict[int, int] = {}
        for v in reversed(self.preorder(vertex)):
            kids = self._children.get(v, ())
            best[v] = 1 + max(best[e.child] for e in kids) if kids else 0
        return best[vertex]

    def relabeled(self, labels: Sequence[str]) -> "TraceTree":
        """Copy of the tree with new vertex labels, same shape."""
        return type(self)(
            tx_hash=self.tx_hash,
            block_number=self.block_number,
            vertices=[
                TraceVertex(label=label, address=v.address, kind=v.kind)
                for v, label in zip(self.vertices, labels)
            ],
            edges=list(self.edges),
        )


def assemble_tree(
    records: Sequence[TraceRecord],
    diagnostics: Optional[DiagnosticCollector] = None,
) -> Optional[TraceTree]:
    """
    Assemble the tree of one transaction.

    Args:
        records: All records of one tx_hash.
        diagnostics: Collector for rejected transactions.

    Returns:
        The tree, or None if the transaction is rejected.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="trees")
    if not records:
        return None
    tx_hash = records[0].tx_hash
    ordered = sorted(records, key=lambda r: r.trace_address)

    external = ordered[0]
    if not external.is_external:
        diagnostics.report(
            "missing_external", "no external transaction record", tx_hash=tx_hash
        )
        return None

    vertex_of: dict[tuple[int, ...], int] = {}
    failed_at: dict[tuple[int, ...], bool] = {}
    vertices = [TraceVertex(label=external.from_address, address=external.from_address)]
    edges: list[TraceEdge] = []

    for t, record in enumerate(ordered):
        path = record.trace_address
        if path in vertex_of:
            diagnostics.report(
                "duplicate_trace",
                "duplicate trace_address",
                tx_hash=tx_hash,
                trace_address=format_trace_address(path),
            )
            return None
        if path:
            parent_path = path[:-1]
            if parent_path not in vertex_of:
                diagnostics.report(
                    "orphan_trace",
                    "trace_address has no parent record",
                    tx_hash=tx_hash,
                    trace_address=format_trace_address(path),
                )
                return None
            parent = vertex_of[parent_path]
            failed = record.failed or failed_at[parent_path]
        else:
            parent = TraceTree.ROOT
            failed = record.failed

        child = len(vertices)
        vertices.append(
            TraceVertex(label=record.to_address or CREATE_PLACEHOLDER, address=record.to_address)
        )
        edges.append(
            TraceEdge(
                parent=parent,
                child=child,
                t=t,
                method_id=record.method_id,
                trace_type=record.trace_type,
                failed=failed,
                value=record.value,
            )
        )
        vertex_of[path] = child
        failed_at[path] = failed

    return TraceTree(
        tx_hash=tx_hash,
        block_number=external.block_number,
        vertices=vertices,
        edges=edges,
    )


def group_by_transaction(records: Iterable[TraceRecord]) -> list[list[TraceRecord]]:
    """Group records by tx_hash, groups in first-appearance order."""
    groups: dict[str, list[TraceRecord]] = {}
    for record in records:
        groups.setdefault(record.tx_hash, []).append(record)
    return list(groups.values())


def _assemble_group(group: list[TraceRecord]) -> tuple[Optional[TraceTree], list[Diagnostic]]:
    collector = DiagnosticCollector(source="trees")
    tree = assemble_tree(group, collector)
    return tree, list(collector)


def assemble_trace_trees(
    records: Iterable[TraceRecord],
    diagnostics: Optional[DiagnosticCollector] = None,
    workers: int = 1,
) -> Iterator[TraceTree]:
    """
    Assemble one tree per transaction.

    Transactions are processed independently; output follows the first
    appearance of each tx_hash regardless of `workers`.

    Args:
        records: Records of any number of transactions.
        diagnostics: Collector for rejected transactions.
        workers: Worker processes.

    Yields:
        Trees of accepted transactions.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="trees")
    groups = group_by_transaction(records)
    results = ordered_map(_assemble_group, groups, workers=workers)

    n_trees = 0
    for tree, diags in results:
        for diag in diags:
            diagnostics.add(diag)
        if tree is not None:
            n_trees += 1
            yield tree

    logger.info("trees_assembled", transactions=len(groups), trees=n_trees)
