"""
Block store.

Maps block hashes to blocks and occurrence counts. Inserting the same hash
twice is idempotent as long as the blocks are equal.
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock
from typing import Iterable, Iterator, Optional

from defiblocks.blocks.extraction import BuildingBlock
from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import BlockStoreError, UnknownBlockError
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import read_jsonl, write_jsonl

logger = get_logger(__name__)


@dataclass
class BlockStore:
    """
    hash → block with occurrence counts.

    Attributes:
        blocks: Distinct blocks by hash.
        counts: Occurrences per hash.
    """

    blocks: dict[str, BuildingBlock] = field(default_factory=dict)
    counts: Counter[str] = field(default_factory=Counter)
    _lock: Lock = field(default_factory=Lock, repr=False, compare=False)

    def __contains__(self, digest: object) -> bool:
        return digest in self.blocks

    def __len__(self) -> int:
        return len(self.blocks)

    def add(self, block: BuildingBlock, count: int = 1) -> None:
        """
        Insert a block occurrence.

        Raises:
            BlockStoreError: If a different block is stored under the same hash.
        """
        with self._lock:
            existing = self.blocks.get(block.hash)
            if existing is None:
                self.blocks[block.hash] = block
            elif existing != block:
                raise BlockStoreError(f"hash {block.hash} maps to two different blocks")
            self.counts[block.hash] += count

    def add_all(self, blocks: Iterable[BuildingBlock]) -> None:
        for block in blocks:
            self.add(block)

    def get(self, digest: str) -> BuildingBlock:
        """
        Look up a block.

        Raises:
            UnknownBlockError: If the hash is not stored.
        """
        block = self.blocks.get(digest.lower().removeprefix("0x"))
        if block is None:
            raise UnknownBlockError(f"unknown hash {digest}")
        return block

    def count(self, digest: str) -> int:
        return self.counts.get(digest, 0)

    def ranked(self) -> Iterator[tuple[BuildingBlock, int]]:
        """Blocks by count descending, then hash."""
        for digest in sorted(self.blocks, key=lambda h: (-self.counts[h], h)):
            yield self.blocks[digest], self.counts[digest]

    def dump(self, path: Path) -> int:
        """Write the store as JSON lines; returns the number of distinct blocks."""
        return write_jsonl(
            ({**block.to_dict(), "occurrence_count": n} for block, n in self.ranked()),
            path,
        )

    @classmethod
    def load(cls, path: Path) -> "BlockStore":
        """
        Read a store written by `dump`.

        Raises:
            BlockStoreError: If the file is missing or a stored hash does not
                match its block.
        """
        if not Path(path).exists():
            raise BlockStoreError(f"block store not found: {path}")
        store = cls()
        for record in read_jsonl(path):
            block = BuildingBlock.from_dict(record)
            if block.recompute_hash() != block.hash:
                raise BlockStoreError(f"stored hash {block.hash} does not match its block")
            store.add(block, int(record.get("occurrence_count", 1)))
        return store


def flatten_block(
    block: BuildingBlock,
    store: BlockStore,
    diagnostics: Optional[DiagnosticCollector] = None,
) -> list[tuple[str, str]]:
    """
    All (protocol, hash) pairs of a block and its nested blocks.

    Args:
        block: Outer block.
        store: Store holding the nested blocks.
        diagnostics: Collector for child hashes missing from the store.

    Returns:
        Multiset as a list, outer block first, children depth-first.

    Raises:
        BlockStoreError: If nested hashes form a cycle.
    """
    result: list[tuple[str, str]] = []

    def visit(current: BuildingBlock, path: tuple[str, ...]) -> None:
        if current.hash in path:
            raise BlockStoreError(f"nesting cycle through {current.hash}")
        result.append((current.root_protocol, current.hash))
        for child in current.child_hashes:
            nested = store.blocks.get(child)
            if nested is None:
                if diagnostics is not None:
                    diagnostics.report("missing_child_block", "nested hash not in store", hash=child, parent=current.hash)
                else:
                    logger.warning("missing_child_block", hash=child, parent=current.hash)
                continue
            visit(nested, path + (current.hash,))

    visit(block, ())
    return result


def describe_block(block: BuildingBlock, count: int = 0) -> list[str]:
    """Human-readable description lines of a block."""
    lines = [
        f"hash:          {block.hash}",
        f"root protocol: {block.root_protocol}",
        f"root method:   {block.root_method_id or 'none'}",
        f"occurrences:   {count}",
        "vertices:",
    ]
    depth = {0: 0}
    for parent, child in block.edges:
        depth[child] = depth[parent] + 1
    for i, (label, degree, method) in enumerate(zip(block.vertex_labels, block.outdegrees, block.method_ids)):
        indent = "  " * depth.get(i, 0)
        lines.append(f"  {i:>3} {indent}{label}  outdegree={degree}  method={method or 'none'}")
    lines.append(f"child hashes ({len(block.child_hashes)}):")
    lines.extend(f"  {h}" for h in block.child_hashes)
    return lines
