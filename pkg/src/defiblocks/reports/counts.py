"""Block frequency table."""

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

import pandas as pd

from defiblocks.diagnostics import DiagnosticCollector
from defiblocks.errors import TraceFormatError
from defiblocks.ingest.records import normalize_method_id
from defiblocks.utils.io import read_table

BLOCK_COUNT_COLUMNS = ("rank", "hash", "root_protocol", "root_method_id", "method_name", "count")


@dataclass(frozen=True)
class BlockCount:
    """Occurrences of one block hash."""

    hash: str
    root_protocol: str
    root_method_id: Optional[str]
    count: int
    method_name: str = ""

    def to_row(self, rank: int) -> dict[str, object]:
        return {
            "rank": rank,
            "hash": self.hash,
            "root_protocol": self.root_protocol,
            "root_method_id": self.root_method_id or "",
            "method_name": self.method_name,
            "count": self.count,
        }


def count_blocks(
    blocks: Iterable[tuple[str, str, Optional[str]]],
    method_names: Optional[Mapping[str, str]] = None,
) -> list[BlockCount]:
    """
    Count block occurrences by hash.

    Args:
        blocks: (hash, root_protocol, root_method_id) per emitted block.
        method_names: Optional method id → name map for annotation.

    Returns:
        Counts sorted by count descending, then hash.
    """
    counter: Counter[str] = Counter()
    annotation: dict[str, tuple[str, Optional[str]]] = {}
    for digest, protocol, method in blocks:
        counter[digest] += 1
        annotation.setdefault(digest, (protocol, method))
    names = method_names or {}
    return [
        BlockCount(
            hash=digest,
            root_protocol=annotation[digest][0],
            root_method_id=annotation[digest][1],
            count=n,
            method_name=names.get(annotation[digest][1] or "", ""),
        )
        for digest, n in sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def load_method_names(path: Path, diagnostics: Optional[DiagnosticCollector] = None) -> dict[str, str]:
    """
    Read a local method-name map (columns method_id, name).

    Raises:
        TraceFormatError: If the file cannot be read or lacks the columns.
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticCollector(source=str(path))
    try:
        frame = read_table(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise TraceFormatError(f"cannot read method names {path}: {exc}") from exc
    if not {"method_id", "name"} <= set(frame.columns):
        raise TraceFormatError(f"{path}: expected columns method_id, name")

    names: dict[str, str] = {}
    for line, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            method = normalize_method_id(row.method_id)
        except ValueError as exc:
            diagnostics.report("invalid_method_name", str(exc), line=line)
            continue
        if method is not None:
            names.setdefault(method, row.name.strip())
    return names
