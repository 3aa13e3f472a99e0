"""
Composition analyses of extracted blocks.

First-level composition lists the protocols whose blocks are nested directly
inside the outermost block of the protocol receiving a transaction. The
composition matrix gives, per receiving protocol X and block protocol Y, the
fraction of X's transactions containing at least one Y-rooted block.
"""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from defiblocks.blocks.extraction import BuildingBlock, TxBlocks
from defiblocks.blocks.store import BlockStore, flatten_block
from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.logging.setup import get_logger
from defiblocks.utils.io import write_frame

logger = get_logger(__name__)

NONE = "NONE"
TREEMAP_COLUMNS = ("root_protocol", "protocols", "n_protocols", "transactions", "share")


def outermost_blocks(blocks_of_tx: Sequence[BuildingBlock]) -> list[BuildingBlock]:
    """
    Blocks of one transaction not nested in another of its blocks.

    Enclosing blocks are emitted after the blocks they contain, so a reverse
    scan matches every nested occurrence to an enclosing child hash.
    """
    pending: Counter[str] = Counter()
    outer: list[BuildingBlock] = []
    for block in reversed(blocks_of_tx):
        if pending[block.hash] > 0:
            pending[block.hash] -= 1
        else:
            outer.append(block)
        pending.update(block.child_hashes)
    outer.reverse()
    return outer


def first_level_composition(tx_root_protocol: str, blocks_of_tx: Sequence[BuildingBlock]) -> frozenset[str]:
    """
    Protocols nested directly inside the outermost blocks of the receiving protocol.

    Args:
        tx_root_protocol: Protocol receiving the external transaction.
        blocks_of_tx: Blocks of that transaction in emission order.

    Returns:
        Protocol set, or {"NONE"} when empty.
    """
    by_hash = {b.hash: b for b in blocks_of_tx}
    protocols: set[str] = set()
    for block in outermost_blocks(blocks_of_tx):
        if block.root_protocol != tx_root_protocol:
            continue
        for child in block.child_hashes:
            nested = by_hash.get(child)
            if nested is not None:
                protocols.add(nested.root_protocol)
    return frozenset(protocols) if protocols else frozenset({NONE})


def treemap_rows(txs: Iterable[TxBlocks], root_protocols: Optional[Sequence[str]] = None) -> list[dict[str, object]]:
    """
    First-level composition shares per receiving protocol.

    Each transaction counts once. Rows are sorted by root protocol, then share
    descending, then protocol set.
    """
    per_root: dict[str, Counter[frozenset[str]]] = {}
    wanted = set(root_protocols) if root_protocols else None
    for tx in txs:
        if wanted is not None and tx.root_protocol not in wanted:
            continue
        combo = first_level_composition(tx.root_protocol, tx.blocks)
        per_root.setdefault(tx.root_protocol, Counter())[combo] += 1

    rows: list[dict[str, object]] = []
    for root in sorted(per_root):
        combos = per_root[root]
        total = sum(combos.values())
        ranked = sorted(combos.items(), key=lambda kv: (-kv[1], "+".join(sorted(kv[0]))))
        for combo, n in ranked:
            rows.append(
                {
                    "root_protocol": root,
                    "protocols": "+".join(sorted(combo)),
                    "n_protocols": 0 if combo == {NONE} else len(combo),
                    "transactions": n,
                    "share": n / total,
                }
            )
    return rows


def tx_flattening(tx: TxBlocks, store: BlockStore, diagnostics: Optional[DiagnosticCollector] = None) -> list[tuple[str, str]]:
    """Flattened (protocol, hash) multiset of one transaction's outermost blocks."""
    flat: list[tuple[str, str]] = []
    for block in outermost_blocks(tx.blocks):
        flat.extend(flatten_block(block, store, diagnostics))
    return flat


@dataclass
class CompositionMatrix:
    """
    Containment fractions per (receiving protocol, block protocol).

    Attributes:
        rows: Receiving protocols.
        columns: Block protocols followed by NONE.
        cells: Fraction of the row's transactions containing the column's blocks.
        intensity: Mean number of the column's blocks per row transaction (no NONE column).
        row_tx_counts: Transactions per receiving protocol.
    """

    rows: list[str]
    columns: list[str]
    cells: np.ndarray
    intensity: np.ndarray
    row_tx_counts: dict[str, int]

    def cell(self, row: str, column: str) -> float:
        return float(self.cells[self.rows.index(row), self.columns.index(column)])

    def containment_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.cells, index=pd.Index(self.rows, name="protocol"), columns=self.columns)
        frame.insert(0, "transactions", [self.row_tx_counts[r] for r in self.rows])
        return frame

    def intensity_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.intensity, index=pd.Index(self.rows, name="protocol"), columns=self.columns[:-1])
        frame.insert(0, "transactions", [self.row_tx_counts[r] for r in self.rows])
        return frame

    def dump(self, containment_path: Path, intensity_path: Path) -> None:
        write_frame(self.containment_frame(), containment_path, float_format="%.4f", index=True)
        write_frame(self.intensity_frame(), intensity_path, float_format="%.4f", index=True)


def build_composition_matrix(
    txs: Iterable[tuple[str, Sequence[tuple[str, str]]]],
    protocols: Optional[Sequence[str]] = None,
    diagnostics: Optional[DiagnosticCollector] = None,
) -> CompositionMatrix:
    """
    Aggregate flattened transactions into the composition matrix.

    Args:
        txs: (receiving protocol, flattened (protocol, hash) multiset) per transaction.
        protocols: Rows to report; receiving protocols without transactions are
            omitted with a diagnostic. Defaults to the protocols seen.
        diagnostics: Collector for omitted rows.

    Returns:
        The composition matrix.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source="composition")
    tx_counts: Counter[str] = Counter()
    contains: dict[str, Counter[str]] = {}
    totals: dict[str, Counter[str]] = {}
    empty: Counter[str] = Counter()
    seen_columns: set[str] = set()

    for root, flat in txs:
        tx_counts[root] += 1
        present = Counter(p for p, _ in flat)
        if not present:
            empty[root] += 1
        contains.setdefault(root, Counter()).update(present.keys())
        totals.setdefault(root, Counter()).update(present)
        seen_columns.update(present)

    candidates = sorted(set(protocols) if protocols is not None else set(tx_counts))
    rows: list[str] = []
    for protocol in candidates:
        if tx_counts[protocol] == 0:
            diagnostics.report("empty_composition_row", "receiving protocol has no transactions", protocol=protocol)
            continue
        rows.append(protocol)

    block_columns = sorted(seen_columns | set(rows))
    columns = block_columns + [NONE]
    cells = np.zeros((len(rows), len(columns)), dtype=np.float64)
    intensity = np.zeros((len(rows), len(block_columns)), dtype=np.float64)
    for i, root in enumerate(rows):
        n = tx_counts[root]
        for j, column in enumerate(block_columns):
            cells[i, j] = contains.get(root, Counter())[column] / n
            intensity[i, j] = totals.get(root, Counter())[column] / n
        cells[i, -1] = empty[root] / n

    logger.info("composition_matrix_built", rows=len(rows), columns=len(columns))
    return CompositionMatrix(
        rows=rows,
        columns=columns,
        cells=cells,
        intensity=intensity,
        row_tx_counts={r: tx_counts[r] for r in rows},
    )
